// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library through the C API only.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aladin/aladin.h"

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(aladin_status s, const std::string& what) {
  if (s != ALADIN_OK) throw Failure(what + ": " + aladin_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<aladin_config, Deleter<aladin_config, aladin_config_free>>;
using Corpus = std::unique_ptr<aladin_corpus, Deleter<aladin_corpus, aladin_corpus_free>>;
using Model = std::unique_ptr<aladin_model, Deleter<aladin_model, aladin_model_free>>;
using Cache = std::unique_ptr<aladin_cache, Deleter<aladin_cache, aladin_cache_free>>;

std::string take(char* s) {
  std::string out = s ? s : "";
  aladin_string_free(s);
  return out;
}

std::string sha256(const std::string& path) {
  char hex[65];
  check(aladin_sha256_file(path.c_str(), hex), "hash " + path);
  return hex;
}

// Options shared by every verb.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    app->add_option("--set", overrides, "override one config entry, key=value");
    app->add_option("--seed", seed, "master seed");
  }

  Config load() const {
    aladin_config* raw = nullptr;
    if (config_path.empty()) {
      check(aladin_config_new(&raw), "config");
    } else {
      check(aladin_config_load(config_path.c_str(), &raw), "config");
    }
    Config cfg(raw);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure("--set expects key=value, got '" + kv + "'");
      check(aladin_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
            "config");
    }
    if (seed) check(aladin_config_set(cfg.get(), "seed", std::to_string(*seed).c_str()), "config");
    return cfg;
  }
};

// Records what a run consumed and produced so it can be repeated exactly.
class Manifest {
 public:
  Manifest(std::string verb, const aladin_config* cfg) : verb_(std::move(verb)) {
    char* dump = nullptr;
    check(aladin_config_dump(cfg, &dump), "config");
    config_ = take(dump);
    check(aladin_config_get_u64(cfg, "seed", 1, &seed_), "config");
  }

  void input(const std::string& name, const std::string& path) {
    inputs_.push_back({name, path, sha256(path)});
  }
  void note(const std::string& key, const std::string& value) { notes_.push_back({key, value}); }

  void write(const std::string& out) const {
    std::ofstream f(out + ".manifest", std::ios::trunc);
    if (!f) throw Failure("cannot write " + out + ".manifest");
    f << "verb=" << verb_ << "\n";
    f << "version=" << aladin_version() << "\n";
    f << "seed=" << seed_ << "\n";
    std::istringstream lines(config_);
    for (std::string line; std::getline(lines, line);) {
      if (!line.empty()) f << "config." << line << "\n";
    }
    for (const auto& [key, value] : notes_) f << key << "=" << value << "\n";
    for (const auto& in : inputs_) {
      f << "input." << in.name << "=" << in.path << "\n";
      f << "input." << in.name << ".sha256=" << in.hash << "\n";
    }
    f << "output=" << out << "\n";
    f << "output.sha256=" << sha256(out) << "\n";
  }

 private:
  struct Input {
    std::string name, path, hash;
  };
  std::string verb_;
  std::string config_;
  std::uint64_t seed_ = 1;
  std::vector<Input> inputs_;
  std::vector<std::pair<std::string, std::string>> notes_;
};

Corpus read_corpus(const std::string& path) {
  aladin_corpus* raw = nullptr;
  check(aladin_corpus_read(path.c_str(), &raw), "corpus");
  return Corpus(raw);
}

Model read_model(const std::string& path) {
  aladin_model* raw = nullptr;
  check(aladin_model_load(path.c_str(), &raw), "checkpoint");
  return Model(raw);
}

Cache read_cache(const std::string& path) {
  aladin_cache* raw = nullptr;
  check(aladin_cache_read(path.c_str(), &raw), "cache");
  return Cache(raw);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f || !(f << text)) throw Failure("cannot write " + path);
}

std::vector<std::uint32_t> parse_words(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::string token;
  std::istringstream in(text);
  while (in >> token) {
    for (char& c : token) {
      if (c == ',') c = ' ';
    }
    std::istringstream parts(token);
    for (std::string t; parts >> t;) {
      try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(t, &used);
        if (used != t.size() || v > 0xffffffffUL) throw std::out_of_range(t);
        out.push_back(static_cast<std::uint32_t>(v));
      } catch (const std::exception&) {
        throw Failure("--text expects vocabulary ids, got '" + t + "'");
      }
    }
  }
  if (out.empty()) throw Failure("--text is empty");
  return out;
}

struct TrainArgs {
  Common common;
  std::string corpus, out, init, metrics;
  bool finetune = false;
};

int run_train(const std::string& verb, const char* scheme, const TrainArgs& a) {
  Config cfg = a.common.load();
  Corpus corpus = read_corpus(a.corpus);
  Manifest manifest(verb, cfg.get());
  manifest.input("corpus", a.corpus);
  Model model;
  if (a.init.empty()) {
    aladin_model* raw = nullptr;
    check(aladin_model_init(cfg.get(), &raw), "model");
    model.reset(raw);
  } else {
    model = read_model(a.init);
    manifest.input("init", a.init);
  }
  std::uint64_t steps = 0;
  check(aladin_train(model.get(), corpus.get(), scheme, cfg.get(),
                     a.metrics.empty() ? nullptr : a.metrics.c_str(), &steps),
        verb);
  check(aladin_model_save(model.get(), a.out.c_str()), "save");
  manifest.note("scheme", scheme);
  manifest.note("steps", std::to_string(steps));
  manifest.write(a.out);
  std::printf("%s: %" PRIu64 " steps, checkpoint %s\n", verb.c_str(), steps, a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Align-and-distill cross-modal retrieval on a synthetic corpus.", "aladin"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Common gen_common;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "write a synthetic paired corpus");
  gen_common.attach(gen);
  gen->add_option("--out", gen_out, "corpus file")->required();

  struct TrainVerb {
    const char* verb;
    const char* scheme;
    const char* help;
    TrainArgs args;
    CLI::App* app = nullptr;
  };
  std::vector<TrainVerb> trains = {
      {"train-align", "align", "train backbone with the alignment triplet loss (A/ft.)", {}},
      {"train-distill", "distill", "distill alignment scores into the matching head (D)", {}},
      {"train-triplet", "triplet", "train the matching head with the triplet loss (T)", {}},
      {"train-joint", "joint", "joint alignment and distillation fine-tuning", {}},
  };
  for (auto& t : trains) {
    t.app = app.add_subcommand(t.verb, t.help);
    t.args.common.attach(t.app);
    t.app->add_option("--corpus", t.args.corpus, "corpus file")->required();
    t.app->add_option("--out", t.args.out, "output checkpoint")->required();
    t.app->add_option("--init", t.args.init, "starting checkpoint");
    t.app->add_option("--metrics", t.args.metrics, "per-step metric log (JSON lines)");
    if (std::string(t.verb) == "train-triplet") {
      t.app->add_flag("--finetune", t.args.finetune, "also update the backbone (T/ft.)");
    }
  }

  Common cache_common;
  std::string cache_model, cache_corpus, cache_split = "test", cache_out;
  auto* cache = app.add_subcommand("cache", "encode a split once and store the features");
  cache_common.attach(cache);
  cache->add_option("--model", cache_model, "checkpoint")->required();
  cache->add_option("--corpus", cache_corpus, "corpus file")->required();
  cache->add_option("--split", cache_split, "train, val or test");
  cache->add_option("--out", cache_out, "cache file")->required();

  Common eval_common;
  std::string eval_cache, eval_corpus, eval_source = "alignment", eval_out;
  std::optional<std::uint64_t> eval_k1, eval_folds;
  auto* eval = app.add_subcommand("eval", "recall@{1,5,10} over a cached split");
  eval_common.attach(eval);
  eval->add_option("--cache", eval_cache, "cache file")->required();
  eval->add_option("--corpus", eval_corpus, "corpus file")->required();
  eval->add_option("--source", eval_source, "alignment, matching or two-stage");
  eval->add_option("--k1", eval_k1, "two-stage candidates");
  eval->add_option("--folds", eval_folds, "average over image folds");
  eval->add_option("--out", eval_out, "report file (JSON lines)");

  Common search_common;
  std::string search_model, search_cache, search_corpus, search_text, search_source = "two-stage",
                                                                      search_out;
  std::optional<std::uint64_t> search_image;
  std::size_t search_k = 10;
  std::optional<std::size_t> search_k1;
  auto* search = app.add_subcommand("search", "query a cached collection");
  search_common.attach(search);
  search->add_option("--model", search_model, "checkpoint")->required();
  search->add_option("--cache", search_cache, "cache file")->required();
  search->add_option("--corpus", search_corpus, "corpus file (for --image)");
  auto* text_opt = search->add_option("--text", search_text, "query word ids, e.g. \"3 17 42\"");
  auto* image_opt = search->add_option("--image", search_image, "query corpus image id");
  text_opt->excludes(image_opt);
  image_opt->needs(search->get_option("--corpus"));
  search->add_option("--k", search_k, "results");
  search->add_option("--k1", search_k1, "two-stage candidates");
  search->add_option("--source", search_source, "alignment, matching or two-stage");
  search->add_option("--out", search_out, "hits file (JSON lines)");

  Common bench_common;
  std::string bench_model, bench_corpus, bench_out;
  auto* bench = app.add_subcommand("bench", "per-query latency of the retrieval pipelines");
  bench_common.attach(bench);
  bench->add_option("--model", bench_model, "checkpoint")->required();
  bench->add_option("--corpus", bench_corpus, "corpus file")->required();
  bench->add_option("--out", bench_out, "timings file (JSON lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "aladin: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    if (*gen) {
      Config cfg = gen_common.load();
      aladin_corpus* raw = nullptr;
      check(aladin_corpus_generate(cfg.get(), &raw), "generate");
      Corpus corpus(raw);
      check(aladin_corpus_write(corpus.get(), gen_out.c_str()), "generate");
      Manifest manifest(verb, cfg.get());
      manifest.write(gen_out);
      std::printf("generate: %" PRIu64 " images, %" PRIu64 " captions -> %s\n",
                  aladin_corpus_images(corpus.get()), aladin_corpus_captions(corpus.get()),
                  gen_out.c_str());
      return 0;
    }
    for (const auto& t : trains) {
      if (*t.app) {
        const char* scheme = t.args.finetune ? "triplet-ft" : t.scheme;
        return run_train(verb, scheme, t.args);
      }
    }
    if (*cache) {
      Config cfg = cache_common.load();
      Model model = read_model(cache_model);
      Corpus corpus = read_corpus(cache_corpus);
      aladin_cache* raw = nullptr;
      check(aladin_cache_build(model.get(), corpus.get(), cache_split.c_str(), &raw), "cache");
      Cache c(raw);
      check(aladin_cache_write(c.get(), cache_out.c_str()), "cache");
      Manifest manifest(verb, cfg.get());
      manifest.input("model", cache_model);
      manifest.input("corpus", cache_corpus);
      manifest.note("split", cache_split);
      manifest.write(cache_out);
      std::printf("cache: %" PRIu64 " images, %" PRIu64 " captions -> %s\n",
                  aladin_cache_images(c.get()), aladin_cache_captions(c.get()),
                  cache_out.c_str());
      return 0;
    }
    if (*eval) {
      Config cfg = eval_common.load();
      std::uint64_t k1 = 0, folds = 0;
      check(aladin_config_get_u64(cfg.get(), "k1", 50, &k1), "config");
      check(aladin_config_get_u64(cfg.get(), "eval_folds", 1, &folds), "config");
      if (eval_k1) k1 = *eval_k1;
      if (eval_folds) folds = *eval_folds;
      Cache c = read_cache(eval_cache);
      Corpus corpus = read_corpus(eval_corpus);
      char* lines = nullptr;
      check(aladin_evaluate(c.get(), corpus.get(), eval_source.c_str(), k1, folds, &lines), "eval");
      const std::string report = take(lines);
      std::fputs(report.c_str(), stdout);
      if (!eval_out.empty()) {
        write_text(eval_out, report);
        Manifest manifest(verb, cfg.get());
        manifest.input("cache", eval_cache);
        manifest.input("corpus", eval_corpus);
        manifest.note("source", eval_source);
        manifest.note("k1", std::to_string(k1));
        manifest.note("folds", std::to_string(folds));
        manifest.write(eval_out);
      }
      return 0;
    }
    if (*search) {
      Config cfg = search_common.load();
      if (search_text.empty() && !search_image) throw Failure("search needs --text or --image");
      std::uint64_t k1 = 0;
      check(aladin_config_get_u64(cfg.get(), "k1", 50, &k1), "config");
      if (search_k1) k1 = *search_k1;
      Model model = read_model(search_model);
      Cache c = read_cache(search_cache);
      std::vector<aladin_hit> hits(search_k);
      if (search_image) {
        Corpus corpus = read_corpus(search_corpus);
        check(aladin_search_image(model.get(), c.get(), corpus.get(), *search_image,
                                  search_source.c_str(), search_k, k1, hits.data()),
              "search");
      } else {
        const auto words = parse_words(search_text);
        check(aladin_search_text(model.get(), c.get(), words.data(), words.size(),
                                 search_source.c_str(), search_k, k1, hits.data()),
              "search");
      }
      std::string text;
      char line[128];
      for (std::size_t i = 0; i < hits.size(); ++i) {
        std::snprintf(line, sizeof line, "{\"rank\":%zu,\"id\":%" PRIu64 ",\"score\":%.17g}\n",
                      i + 1, hits[i].id, hits[i].score);
        text += line;
      }
      std::fputs(text.c_str(), stdout);
      if (!search_out.empty()) {
        write_text(search_out, text);
        Manifest manifest(verb, cfg.get());
        manifest.input("model", search_model);
        manifest.input("cache", search_cache);
        manifest.note("query", search_image ? "image " + std::to_string(*search_image)
                                            : "text " + search_text);
        manifest.note("source", search_source);
        manifest.write(search_out);
      }
      return 0;
    }
    if (*bench) {
      Config cfg = bench_common.load();
      Model model = read_model(bench_model);
      Corpus corpus = read_corpus(bench_corpus);
      char* lines = nullptr;
      check(aladin_bench(model.get(), corpus.get(), cfg.get(), &lines), "bench");
      const std::string timings = take(lines);
      std::fputs(timings.c_str(), stdout);
      if (!bench_out.empty()) {
        write_text(bench_out, timings);
        Manifest manifest(verb, cfg.get());
        manifest.input("model", bench_model);
        manifest.input("corpus", bench_corpus);
        manifest.write(bench_out);
      }
      return 0;
    }
  } catch (const Failure& e) {
    std::fprintf(stderr, "aladin %s: error: %s\n", verb.c_str(), e.what());
    return 1;
  }
  std::cerr << app.help();
  return 2;
}
