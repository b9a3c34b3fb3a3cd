// Copyright 2026 The NGSI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ngsi/ast.hpp"
#include "ngsi/eval.hpp"
#include "ngsi/grammar.hpp"
#include "ngsi/inference.hpp"
#include "ngsi/model_io.hpp"
#include "ngsi/reference_parser.hpp"
#include "ngsi/sampler.hpp"
#include "ngsi/search.hpp"
#include "ngsi/trainer.hpp"

namespace ngsi::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

struct Range {
  int lo = 0;
  int hi = 0;
};

// "6..11" or a single integer.
Range parse_range(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) {
      throw std::invalid_argument("bad range '" + text + "'");
    }
    return v;
  };
  auto dots = text.find("..");
  if (dots == std::string::npos) {
    int v = to_int(text);
    return {v, v};
  }
  Range r{to_int(text.substr(0, dots)), to_int(text.substr(dots + 2))};
  if (r.lo > r.hi) throw std::invalid_argument("empty range '" + text + "'");
  return r;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream is(text);
  while (std::getline(is, part, sep)) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

CLI::Validator checked(std::function<void(const std::string&)> parse,
                       std::string name) {
  return CLI::Validator(
      [parse = std::move(parse)](std::string& s) -> std::string {
        try {
          parse(s);
        } catch (const std::exception& e) {
          return e.what();
        }
        return {};
      },
      name);
}

// Options named in the file are filled in unless already given on the
// command line.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read config " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key == "config") throw UsageError(path + ": config files do not nest");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" +
                       key + "' for " + sub->get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

void log_config(const CLI::App* sub, std::ostream& err) {
  err << "# ngsi " << sub->get_name() << "\n";
  std::istringstream lines(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty()) err << "#   " << line << "\n";
  }
}

template <class Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    fallback.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  fn(os);
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> read_lines(const std::string& path,
                                    std::istream& fallback) {
  std::vector<std::string> lines;
  std::string line;
  if (path.empty() || path == "-") {
    while (std::getline(fallback, line)) lines.push_back(line);
    return lines;
  }
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

std::string strip_to_tokens(const std::string& line) {
  return line.substr(0, line.find('\t'));
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string bucket = "5:15:1:9";
  int n = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::string pairs;
  int jobs = 1;
};

void run_gen(const GenOptions& o, Streams s) {
  const Grammar& g = builtin_grammar();
  SampleBucket bucket = SampleBucket::parse(o.bucket);
  std::vector<Program> programs(static_cast<std::size_t>(o.n));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(o.jobs));
  auto work = [&](std::size_t first) {
    try {
      for (std::size_t i = first; i < programs.size();
           i += static_cast<std::size_t>(o.jobs)) {
        Rng rng = make_rng(o.seed, SeedStream::kGeneration, {i});
        programs[i] = sample_program(bucket, rng);
      }
    } catch (...) {
      failures[first] = std::current_exception();
    }
  };
  if (o.jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> workers;
    for (int j = 0; j < o.jobs; ++j) {
      workers.emplace_back(work, static_cast<std::size_t>(j));
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  with_output(o.out, s.out, [&](std::ostream& os) {
    for (const Program& p : programs) {
      os << g.detokenize(p.tokens) << '\t' << serialize(p.tree, g) << '\n';
    }
  });
  if (!o.pairs.empty()) {
    with_output(o.pairs, s.out, [&](std::ostream& os) {
      for (const Program& p : programs) {
        for (const TrainingPair& tp : extract_training_pairs(p.tree, g)) {
          os << g.detokenize(tp.input) << '\t' << g.nonterminal_name(tp.nt)
             << '\t' << g.rule(tp.label).label << '\n';
        }
      }
    });
  }
  s.err << "# wrote " << programs.size() << " programs\n";
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  TrainConfig cfg;
  int stages = 4;
  std::string model;
  std::string log;
  bool quiet = false;
};

void run_train(const TrainOptions& o, Streams s) {
  auto schedule = curriculum_schedule(o.stages);
  char buf[160];
  auto result = train(schedule, o.cfg, [&](const TrainLogRow& row) {
    if (o.quiet) return;
    std::snprintf(buf, sizeof buf,
                  "# stage %d iter %d loss %.6f heldout_step_acc %.6f\n",
                  row.stage, row.iteration, row.loss, row.heldout_step_acc);
    s.err << buf;
  });
  save_model(result.model, o.model);
  if (!o.log.empty()) {
    with_output(o.log, s.out,
                [&](std::ostream& os) { write_training_log(result.log, os); });
  }
  s.err << "# saved " << o.model << "\n";
}

// ---------------------------------------------------------------- infer

struct InferOptions {
  std::string model;
  std::string mode = "fallback";
  InferConfig cfg;
  bool no_verify = false;
  std::string input;
  std::string out;
};

void run_infer(InferOptions o, Streams s) {
  const Grammar& g = builtin_grammar();
  NeuralGuider guider(load_model(o.model, g), g);
  auto rows = infer_lines(read_lines(o.input, s.in), guider, o.cfg, g);
  with_output(o.out, s.out, [&](std::ostream& os) {
    for (const InferRow& row : rows) {
      if (row.tree) {
        os << serialize(*row.tree, g) << '\n';
      } else {
        os << "ERROR " << row.error << '\n';
      }
    }
  });
}

// ---------------------------------------------------------------- search

struct SearchOptions {
  SearchConfig cfg;
  std::string input;
  std::string out;
};

void run_search(const SearchOptions& o, Streams s) {
  const Grammar& g = builtin_grammar();
  auto lines = read_lines(o.input, s.in);
  with_output(o.out, s.out, [&](std::ostream& os) {
    for (const std::string& raw : lines) {
      std::string line = strip_to_tokens(raw);
      if (blank(line)) continue;
      TokenSeq tokens;
      try {
        tokens = g.tokenize(line);
      } catch (const GrammarError&) {
        os << "ERROR unknown_token\n";
        continue;
      }
      SearchResult r = iddfs_parse(tokens, o.cfg, g);
      if (r.tree) {
        os << serialize(*r.tree, g) << '\n';
      } else {
        os << "ERROR " << to_string(r.status) << '\n';
      }
    }
  });
}

// ---------------------------------------------------------------- parse

struct ParseOptions {
  bool oracle = false;
  std::string input;
  std::string out;
};

void run_parse(const ParseOptions& o, Streams s) {
  const Grammar& g = builtin_grammar();
  auto lines = read_lines(o.input, s.in);
  with_output(o.out, s.out, [&](std::ostream& os) {
    for (const std::string& raw : lines) {
      std::string line = strip_to_tokens(raw);
      if (blank(line)) continue;
      try {
        os << serialize(reference_parse(g.tokenize(line), g.start()), g)
           << '\n';
      } catch (const GrammarError&) {
        os << "ERROR unknown_token\n";
      } catch (const ParseError&) {
        os << "ERROR unparseable\n";
      }
    }
  });
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  EvalConfig cfg;
  std::string model;
  std::string methods = "ngsi";
  std::string depths = "6..11";
  std::string lengths = "15..30";
  std::string mode = "fallback";
  bool no_timing = false;
  std::string out;
};

void run_eval(const EvalOptions& o, Streams s) {
  std::optional<NeuralGuider> guider;
  if (!o.model.empty()) guider.emplace(load_model(o.model));
  auto records = evaluate_grid(o.cfg, guider ? &*guider : nullptr);
  with_output(o.out, s.out,
              [&](std::ostream& os) { os << to_csv(records); });
}

// ---------------------------------------------------------------- inspect

void run_inspect_grammar(Streams s) {
  const Grammar& g = builtin_grammar();
  for (const ProductionRule& r : g.rules()) {
    s.out << r.label << '\t' << g.rule_to_string(r) << '\n';
  }
}

void run_inspect_model(const std::string& path, Streams s) {
  for (const TensorInfo& t : inspect_model(path)) {
    s.out << t.name << '\t';
    for (std::size_t i = 0; i < t.dims.size(); ++i) {
      s.out << (i ? "x" : "") << t.dims[i];
    }
    s.out << '\n';
  }
}

void add_io(CLI::App* sub, std::string& input, std::string& out) {
  sub->add_option("--input", input, "Token lines (default stdin)");
  sub->add_option("--out", out, "Output file (default stdout)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err) {
  Streams streams{in, out, err};
  CLI::App app{"Neurally guided structure inference for WHILE programs",
               "ngsi"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::string config;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key=value file; flags win")
        ->check(CLI::ExistingFile);
  };
  auto range_check = checked([](const std::string& v) { parse_range(v); },
                             "RANGE");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Sample a program corpus");
  gen_cmd->add_option("--bucket", gen.bucket, "min_len:max_len:min_depth:max_depth")
      ->check(checked([](const std::string& v) { SampleBucket::parse(v); },
                      "BUCKET"));
  gen_cmd->add_option("--n", gen.n, "Number of programs")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Corpus file (default stdout)");
  gen_cmd->add_option("--pairs", gen.pairs, "Also write per-node pairs here");
  gen_cmd->add_option("--jobs", gen.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  add_config(gen_cmd);

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Curriculum training");
  train_cmd->add_option("--model", tr.model, "Model file to write")->required();
  train_cmd->add_option("--log", tr.log, "Training log CSV");
  train_cmd->add_option("--seed", tr.cfg.seed, "Random seed");
  train_cmd->add_option("--stages", tr.stages, "Curriculum stages per cycle")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--iterations", tr.cfg.iterations_per_stage,
                        "Iterations per stage");
  train_cmd->add_option("--batch", tr.cfg.batch_size, "Minibatch size");
  train_cmd->add_option("--lr", tr.cfg.adam.alpha, "Adam step size");
  train_cmd->add_option("--beta1", tr.cfg.adam.beta1, "Adam beta1");
  train_cmd->add_option("--beta2", tr.cfg.adam.beta2, "Adam beta2");
  train_cmd->add_option("--epsilon", tr.cfg.adam.epsilon, "Adam epsilon");
  train_cmd->add_option("--embed", tr.cfg.embed_dim, "Embedding width");
  train_cmd->add_option("--hidden", tr.cfg.hidden_dim, "Recurrent state width");
  train_cmd->add_option("--programs-per-stage", tr.cfg.programs_per_stage,
                        "Programs sampled per stage");
  train_cmd->add_option("--heldout", tr.cfg.heldout_programs,
                        "Held-out programs per stage");
  train_cmd->add_option("--eval-every", tr.cfg.eval_every,
                        "Iterations between held-out checks");
  train_cmd->add_option("--early-stop", tr.cfg.early_stop_accuracy,
                        "Held-out accuracy that ends a stage");
  train_cmd->add_flag("--quiet", tr.quiet, "No progress lines");
  add_config(train_cmd);

  InferOptions inf;
  auto* infer_cmd = app.add_subcommand("infer", "Guided parsing of token lines");
  infer_cmd->add_option("--model", inf.model, "Model file")->required();
  infer_cmd->add_option("--mode", inf.mode, "greedy|fallback|beam")
      ->check(CLI::IsMember({"greedy", "fallback", "beam"}));
  infer_cmd->add_option("--beam-width", inf.cfg.beam_width, "Beam width")
      ->check(CLI::PositiveNumber);
  infer_cmd->add_option("--max-recursion", inf.cfg.max_recursion_depth,
                        "Recursion cap")
      ->check(CLI::PositiveNumber);
  infer_cmd->add_flag("--no-verify", inf.no_verify,
                      "Skip the reconstruction check");
  add_io(infer_cmd, inf.input, inf.out);
  add_config(infer_cmd);

  SearchOptions se;
  auto* search_cmd = app.add_subcommand("search", "Iterative deepening baseline");
  search_cmd->add_option("--max-depth", se.cfg.max_depth, "Largest depth limit")
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("--time-limit", se.cfg.time_limit_seconds,
                         "Seconds per program")
      ->check(CLI::PositiveNumber);
  add_io(search_cmd, se.input, se.out);
  add_config(search_cmd);

  ParseOptions pa;
  auto* parse_cmd = app.add_subcommand("parse", "Reference parse of token lines");
  parse_cmd->add_flag("--oracle", pa.oracle, "Use the reference parser")
      ->required();
  add_io(parse_cmd, pa.input, pa.out);
  add_config(parse_cmd);

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Exact-match grid evaluation");
  eval_cmd->add_option("--model", ev.model, "Model file (ngsi methods)");
  eval_cmd->add_option("--methods", ev.methods,
                       "Comma list of ngsi, ngsi-greedy, ngsi-fallback, "
                       "ngsi-beam, search, oracle");
  eval_cmd->add_option("--depths", ev.depths, "lo..hi")->check(range_check);
  eval_cmd->add_option("--lengths", ev.lengths, "lo..hi")->check(range_check);
  eval_cmd->add_option("--per-cell", ev.cfg.per_cell, "Programs per cell")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", ev.cfg.seed, "Random seed");
  eval_cmd->add_option("--jobs", ev.cfg.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--mode", ev.mode, "Mode for the ngsi method")
      ->check(CLI::IsMember({"greedy", "fallback", "beam"}));
  eval_cmd->add_option("--beam-width", ev.cfg.infer.beam_width, "Beam width")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--search-max-depth", ev.cfg.search.max_depth,
                       "Baseline depth cap")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--search-time-limit", ev.cfg.search.time_limit_seconds,
                       "Baseline seconds per program")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--no-timing", ev.no_timing,
                     "Write zero times so output is reproducible");
  eval_cmd->add_option("--out", ev.out, "CSV file (default stdout)");
  add_config(eval_cmd);

  auto* grammar_cmd =
      app.add_subcommand("inspect-grammar", "Print the rule table");

  std::string model_path;
  auto* model_cmd =
      app.add_subcommand("inspect-model", "Print tensor names and shapes");
  model_cmd->add_option("--model", model_path, "Model file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    CLI::App* sub = app.get_subcommands().front();
    if (!config.empty()) apply_config(sub, config);

    // Everything below can still reject a value as a usage error.
    try {
      if (sub == train_cmd) tr.cfg.validate();
      if (sub == infer_cmd) {
        inf.cfg.mode = parse_infer_mode(inf.mode);
        inf.cfg.verify_reconstruction = !inf.no_verify;
        inf.cfg.validate();
      }
      if (sub == eval_cmd) {
        Range d = parse_range(ev.depths);
        Range l = parse_range(ev.lengths);
        ev.cfg.min_depth = d.lo;
        ev.cfg.max_depth = d.hi;
        ev.cfg.min_length = l.lo;
        ev.cfg.max_length = l.hi;
        ev.cfg.methods = split(ev.methods, ',');
        ev.cfg.infer.mode = parse_infer_mode(ev.mode);
        ev.cfg.record_timing = !ev.no_timing;
        ev.cfg.validate();
        for (const std::string& m : ev.cfg.methods) {
          if (m.rfind("ngsi", 0) == 0 && ev.model.empty()) {
            throw UsageError("method " + m + " needs --model");
          }
        }
      }
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (sub != grammar_cmd && sub != model_cmd) log_config(sub, err);

    if (sub == gen_cmd) run_gen(gen, streams);
    if (sub == train_cmd) run_train(tr, streams);
    if (sub == infer_cmd) run_infer(inf, streams);
    if (sub == search_cmd) run_search(se, streams);
    if (sub == parse_cmd) run_parse(pa, streams);
    if (sub == eval_cmd) run_eval(ev, streams);
    if (sub == grammar_cmd) run_inspect_grammar(streams);
    if (sub == model_cmd) run_inspect_model(model_path, streams);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "ngsi: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "ngsi: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "ngsi: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace ngsi::cli
