#include "rgkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "rgkit/amalgam.hpp"
#include "rgkit/amenable.hpp"
#include "rgkit/chains.hpp"
#include "rgkit/lueck.hpp"
#include "rgkit/rank.hpp"
#include "rgkit/schreier.hpp"

namespace rgkit::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(std::filesystem::path const& path, std::string const& field) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(field, "cannot read " + path.string());
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(std::string const& path, std::string const& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) {
    throw std::runtime_error("cannot write " + path);
  }
}

json const* find(json const& j, char const* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::uint64_t get_unsigned(json const& j, char const* key, std::string const& path,
                           std::uint64_t fallback, bool positive = false) {
  json const* v = find(j, key);
  if (!v) {
    return fallback;
  }
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
    throw ConfigError(path + "." + key, "expected a nonnegative integer");
  }
  auto const x = v->get<std::uint64_t>();
  if (positive && x == 0) {
    throw ConfigError(path + "." + key, "must be positive");
  }
  return x;
}

std::uint64_t require_unsigned(json const& j, char const* key, std::string const& path,
                               bool positive = false) {
  if (!find(j, key)) {
    throw ConfigError(path.empty() ? key : path + "." + key, "missing");
  }
  return get_unsigned(j, key, path, 0, positive);
}

double require_number(json const& j, char const* key, std::string const& path) {
  json const* v = find(j, key);
  if (!v) {
    throw ConfigError(path + "." + key, "missing");
  }
  if (!v->is_number()) {
    throw ConfigError(path + "." + key, "expected a number");
  }
  return v->get<double>();
}

bool get_bool(json const& j, char const* key, std::string const& path, bool fallback) {
  json const* v = find(j, key);
  if (!v) {
    return fallback;
  }
  if (!v->is_boolean()) {
    throw ConfigError(path + "." + key, "expected true or false");
  }
  return v->get<bool>();
}

std::string get_string(json const& j, char const* key, std::string const& path,
                       std::string fallback = {}) {
  json const* v = find(j, key);
  if (!v) {
    return fallback;
  }
  if (!v->is_string()) {
    throw ConfigError(path.empty() ? key : path + "." + key, "expected a string");
  }
  return v->get<std::string>();
}

Field parse_field(std::string const& s, std::string const& path) {
  if (s == "Q") {
    return Field::rationals();
  }
  if (s.size() > 1 && s[0] == 'F') {
    try {
      std::size_t used = 0;
      unsigned long const p = std::stoul(s.substr(1), &used);
      if (used + 1 == s.size() && p < (1ul << 31)) {
        return Field::prime(static_cast<std::uint32_t>(p));
      }
    } catch (std::exception const&) {
    }
  }
  throw ConfigError(path, "expected Q or F<prime>, got " + s);
}

std::shared_ptr<Presentation const> presentation_of(ExperimentConfig const& c) {
  return std::make_shared<Presentation const>(parse_presentation(c.presentation));
}

std::vector<LevelHom> chain_homs(ChainSpec const& spec, Presentation const& p) {
  if (spec.kind == "homs") {
    auto homs = parse_chain_homs(spec.homs, p);
    homs.resize(std::min(homs.size(), spec.depth));
    return homs;
  }
  std::vector<LevelHom> homs;
  std::size_t const d = p.generator_count();
  std::uint64_t q = 1;
  for (std::size_t j = 1; j <= spec.depth; ++j) {
    q *= spec.base;
    AbelianHom h;
    h.moduli.assign(d, q);
    h.images.assign(d, std::vector<std::int64_t>(d, 0));
    for (std::size_t g = 0; g < d; ++g) {
      h.images[g][g] = 1;
    }
    homs.emplace_back(std::move(h));
  }
  return homs;
}

Chain build_chain(ExperimentConfig const& c, std::shared_ptr<Presentation const> p) {
  if (c.chain.kind == "derived") {
    return derived_p_chain(p, c.chain.prime, c.chain.depth, c.budgets.max_cosets);
  }
  return nested_kernel_chain(p, chain_homs(c.chain, *p), c.budgets.max_cosets);
}

std::vector<Word> folner_words(json const& f, std::size_t d, Presentation const& p) {
  std::string const kind = get_string(f, "kind", "params.folner");
  if (kind == "words") {
    json const* ws = find(f, "words");
    if (!ws || !ws->is_array() || ws->empty()) {
      throw ConfigError("params.folner.words", "expected a nonempty list of words");
    }
    std::vector<Word> out;
    for (auto const& w : *ws) {
      if (!w.is_string()) {
        throw ConfigError("params.folner.words", "expected strings");
      }
      out.push_back(parse_word(w.get<std::string>(), p.generator_names()));
    }
    return out;
  }
  if (kind != "box" && kind != "interval") {
    throw ConfigError("params.folner.kind", "expected box, interval or words");
  }
  std::uint64_t const side = require_unsigned(f, "side", "params.folner", true);
  double const total = std::pow(static_cast<double>(side), static_cast<double>(d));
  if (total > 1e7) {
    throw ConfigError("params.folner.side", "box too large");
  }
  std::vector<Word> out;
  std::vector<std::uint64_t> e(d, 0);
  while (true) {
    Word w;
    for (std::size_t g = 0; g < d; ++g) {
      w = w * Word::generator(g).power(static_cast<std::int64_t>(e[g]));
    }
    out.push_back(w);
    std::size_t g = d;
    while (g > 0 && ++e[g - 1] == side) {
      e[--g] = 0;
    }
    if (g == 0) {
      break;
    }
  }
  return out;
}

std::unique_ptr<GroupModel> make_model(std::string const& name, std::size_t d) {
  if (name == "free-abelian") {
    return std::make_unique<FreeAbelianModel>(d);
  }
  if (name == "free") {
    return std::make_unique<FreeModel>(d);
  }
  throw ConfigError("params.model", "expected free-abelian or free");
}

std::vector<std::size_t> generator_indices(json const& j, char const* key,
                                           Presentation const& p) {
  std::string const path = std::string("params.") + key;
  json const* v = find(j, key);
  if (!v || !v->is_array() || v->empty()) {
    throw ConfigError(path, "expected a nonempty list of generator names");
  }
  std::vector<std::size_t> out;
  for (auto const& name : *v) {
    auto const& names = p.generator_names();
    auto it = name.is_string() ? std::find(names.begin(), names.end(), name.get<std::string>())
                               : names.end();
    if (it == names.end()) {
      throw ConfigError(path, "unknown generator " + name.dump());
    }
    out.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  return out;
}

// Integral when it fits, so small estimates print as integers.
ordered_json count_json(double x) {
  if (x < 1e18) {
    return static_cast<std::uint64_t>(std::llround(x));
  }
  return x;
}

ordered_json transversal_json(InvariantTransversal const& t) {
  return ordered_json::parse(t.to_json());
}

// Task runners fill `result` and optionally the CSV text.
struct TaskOutput {
  ordered_json result;
  std::string csv;
  bool failed_check = false;
};

TaskOutput run_rank_gradient(ExperimentConfig const& cfg, Chain const& c) {
  RankOptions o;
  o.tietze_passes = cfg.budgets.tietze_passes;
  o.parallel = get_bool(cfg.params, "parallel", "params", false);
  RankGradientReport r = rank_gradient(c, o);
  return {ordered_json::parse(r.to_json()), r.to_csv()};
}

TaskOutput run_split_search(ExperimentConfig const& cfg, Chain const& c) {
  std::size_t const level = get_unsigned(cfg.params, "level", "params", c.depth());
  if (level > c.depth()) {
    throw ConfigError("params.level", "chain has only " + std::to_string(c.depth()) + " levels");
  }
  SchreierGraph g(c.level(level).table);
  SearchOptions o;
  o.effort = cfg.budgets.effort;
  o.max_seeds = get_unsigned(cfg.params, "max_seeds", "params", 0);
  o.seed = cfg.seed;
  SearchResult r = search_almost_invariant(g, require_number(cfg.params, "alpha", "params"),
                                           require_number(cfg.params, "eps", "params"), o, level);
  TaskOutput out;
  out.result["found"] = r.found;
  out.result["witness"] = ordered_json::parse(r.witness.to_json());
  bool const proper = std::find(r.in_a.begin(), r.in_a.end(), true) != r.in_a.end() &&
                      std::find(r.in_a.begin(), r.in_a.end(), false) != r.in_a.end();
  if (r.found && proper) {
    SplitDatum d = split(reidemeister_schreier(g), g, r.in_a);
    out.result["split"] = {{"x1", d.x1.size()}, {"x2", d.x2.size()}, {"x3", d.x3.size()},
                           {"s1", d.s1.size()}, {"s2", d.s2.size()}, {"s3", d.s3.size()},
                           {"trivial_amalgam", d.trivial_amalgam()}};
    out.result["index_probe"] =
        ordered_json::parse(index_condition_probe(d, g, cfg.budgets.max_cosets).to_json());
    if (!cfg.outputs.split.empty()) {
      write_file(cfg.outputs.split, export_split(d));
    }
  }
  return out;
}

TaskOutput run_weiss(ExperimentConfig const& cfg, Chain const& c) {
  Presentation const& p = c.origin();
  auto model = make_model(get_string(cfg.params, "model", "params", "free-abelian"),
                          p.generator_count());
  std::vector<Word> a = folner_words(cfg.params.at("folner"), p.generator_count(), p);
  Step1Report s1 = weiss_step1(c, *model, a);
  TaskOutput out;
  out.csv = "stage,level,size,boundary,epsilon_achieved,epsilon_bound\n";
  auto csv_line = [&](std::string const& stage, InvariantTransversal const& t) {
    std::ostringstream s;
    s << stage << ',' << t.level << ',' << t.size() << ',' << t.boundary << ','
      << t.epsilon_achieved().str() << ',' << t.epsilon_bound << '\n';
    out.csv += s.str();
  };
  out.result["step1"] = {{"a_size", s1.a_size},
                         {"a_boundary", s1.a_boundary},
                         {"x_size", s1.x_size},
                         {"ax_size", s1.ax_size},
                         {"ax_boundary", s1.ax_boundary},
                         {"b_size", s1.b_size},
                         {"b_boundary", s1.b_boundary},
                         {"cover_bound_met", s1.cover_bound_met},
                         {"b_chain_holds", s1.b_chain_holds},
                         {"b_bound_holds", s1.b_bound_holds},
                         {"t_bound_holds", s1.t_bound_holds},
                         {"transversal", transversal_json(s1.transversal)}};
  csv_line("step1", s1.transversal);
  InvariantTransversal t = s1.transversal;
  Step2Options o;
  o.max_levels_ahead = get_unsigned(cfg.params, "max_levels_ahead", "params", 4, true);
  std::size_t const iterations = get_unsigned(cfg.params, "iterations", "params", 0);
  out.result["step2"] = ordered_json::array();
  for (std::size_t n = 1; n <= iterations; ++n) {
    Step2Report r = weiss_step2(c, *model, t, o);
    out.result["step2"].push_back({{"from_level", r.from_level},
                                   {"s1_size", r.s1_size},
                                   {"s1_distinct", r.s1_distinct},
                                   {"t2_size", r.t2_size},
                                   {"t2_boundary", r.t2_boundary},
                                   {"t2_epsilon", r.t2_epsilon.str()},
                                   {"product_identity", r.product_identity},
                                   {"transversal", transversal_json(r.transversal)}});
    csv_line("step2." + std::to_string(n), r.transversal);
    t = r.transversal;
  }
  if (get_bool(cfg.params, "schreier", "params", true)) {
    SchreierGeneratingSet s = schreier_generators_from_transversal(c, *model, t);
    out.result["schreier"] = {{"level", s.level},       {"size", s.size()},
                              {"distinct", s.distinct}, {"certified", s.certified},
                              {"conjugated", s.conjugated}, {"r_upper", s.r_upper.str()},
                              {"r_upper_value", s.r_upper.to_double()}};
  }
  if (!cfg.outputs.transversal.empty()) {
    write_file(cfg.outputs.transversal, export_transversal(t, *c.level(t.level).table));
  }
  return out;
}

GroupAlgebraMatrix config_matrix(ExperimentConfig const& cfg, Presentation const& p) {
  return parse_group_algebra_matrix(get_string(cfg.params, "matrix", "params"), p);
}

TaskOutput run_lueck(ExperimentConfig const& cfg, Chain const& c) {
  GroupAlgebraMatrix a = config_matrix(cfg, c.origin());
  Field const k = find(cfg.params, "field")
                      ? parse_field(get_string(cfg.params, "field", "params"), "params.field")
                      : a.field;
  LueckOptions o;
  o.parallel = get_bool(cfg.params, "parallel", "params", false);
  KernelDimSequence s = approx_sequence(a, c, k, o);
  TaskOutput out{ordered_json::parse(s.to_json()), s.to_csv()};
  if (json const* boxes = find(cfg.params, "folner_boxes")) {
    // Boxes of side s in Z^d are exactly 1/s-invariant.
    if (!boxes->is_array()) {
      throw ConfigError("params.folner_boxes", "expected a list of sides");
    }
    std::size_t const d = c.origin().generator_count();
    FreeAbelianModel m(d);
    std::vector<FolnerMember> family;
    for (auto const& side : *boxes) {
      json const f = {{"kind", "box"}, {"side", side}};
      family.push_back({folner_words(f, d, c.origin()), 1.0 / side.get<double>()});
    }
    out.result["ornstein_weiss"] = ordered_json::parse(ow_limit_estimate(a, family, m, k).to_json());
  }
  return out;
}

TaskOutput run_bg_probe(ExperimentConfig const& cfg, Chain const& c) {
  BgReport r = bounded_generation_probe(c, require_unsigned(cfg.params, "t", "params", true));
  return {ordered_json::parse(r.to_json()), {}};
}

TaskOutput run_freeprod(ExperimentConfig const& cfg, Chain const& c) {
  auto const f1 = generator_indices(cfg.params, "factor1", c.origin());
  auto const f2 = generator_indices(cfg.params, "factor2", c.origin());
  RankOptions o;
  o.tietze_passes = cfg.budgets.tietze_passes;
  TaskOutput out;
  out.result["levels"] = ordered_json::array();
  out.csv = "level,index,k1,k2,d1,d2,formula_d,direct_lower,direct_upper\n";
  bool all = true;
  for (std::size_t n = 1; n <= c.depth(); ++n) {
    FreeProductCheck chk = free_product_check(c.level(n).table, f1, f2, o);
    ordered_json j = ordered_json::parse(chk.to_json());
    j["level"] = n;
    out.result["levels"].push_back(j);
    all = all && chk.agrees();
    out.csv += std::to_string(n) + ',' + std::to_string(chk.index) + ',' + std::to_string(chk.k1) +
               ',' + std::to_string(chk.k2) + ',' + std::to_string(chk.d1) + ',' +
               std::to_string(chk.d2) + ',' + std::to_string(chk.formula.d_n) + ',' +
               std::to_string(chk.direct.lower) + ',' + std::to_string(chk.direct.upper) + '\n';
  }
  out.result["all_agree"] = all;
  out.failed_check = !all;
  return out;
}

bool needs_normal_chain(std::string const& task) {
  return task == "lueck" || task == "bg-probe" || task == "freeprod-check";
}

ordered_json envelope(ExperimentConfig const& cfg) {
  ordered_json j;
  j["tool"] = "rgkit";
  j["version"] = kVersion;
  j["modules"] = {{"presentations", "1.0"}, {"cosets", "1.0"}, {"schreier", "1.0"},
                  {"chains", "1.0"},        {"rank", "1.0"},   {"amalgam", "1.0"},
                  {"amenable", "1.0"},      {"lueck", "1.0"},  {"cli", "1.0"}};
  j["task"] = cfg.task;
  j["config_hash"] = cfg.hash();
  return j;
}

}  // namespace

json ExperimentConfig::canonical() const {
  json j;
  j["task"] = task;
  j["presentation"] = presentation;
  j["chain"] = {{"kind", chain.kind}};
  if (chain.kind == "derived") {
    j["chain"]["prime"] = chain.prime;
    j["chain"]["depth"] = chain.depth;
  } else if (chain.kind == "abelian-powers") {
    j["chain"]["base"] = chain.base;
    j["chain"]["depth"] = chain.depth;
  } else {
    j["chain"]["homs"] = chain.homs;
    j["chain"]["depth"] = chain.depth;
  }
  j["budgets"] = {{"max_cosets", budgets.max_cosets},
                  {"effort", budgets.effort},
                  {"tietze_passes", budgets.tietze_passes}};
  j["seed"] = seed;
  j["params"] = params;
  return j;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical().dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig load_config(json const& j, std::filesystem::path const& base_dir) {
  if (!j.is_object()) {
    throw ConfigError("config", "expected a JSON object");
  }
  auto resolve = [&](std::string const& rel) {
    std::filesystem::path p(rel);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  ExperimentConfig c;
  c.task = get_string(j, "task", "");
  if (c.task.empty()) {
    throw ConfigError("task", "missing");
  }
  if (std::find(task_names().begin(), task_names().end(), c.task) == task_names().end()) {
    throw ConfigError("task", "unknown task " + c.task);
  }

  if (find(j, "presentation")) {
    c.presentation = get_string(j, "presentation", "");
  } else if (find(j, "presentation_file")) {
    c.presentation = read_file(resolve(get_string(j, "presentation_file", "")), "presentation_file");
  } else {
    throw ConfigError("presentation", "missing");
  }
  Presentation p;
  try {
    p = parse_presentation(c.presentation);
  } catch (ParseError const& e) {
    throw ConfigError("presentation", e.what());
  }

  // Depth may sit in the chain spec or in the budgets; the smaller wins.
  json const* budget_obj = find(j, "budgets");
  auto chain_depth = [&](json const& ch) -> std::size_t {
    bool const in_chain = find(ch, "depth") != nullptr;
    bool const in_budget = budget_obj && budget_obj->is_object() && find(*budget_obj, "depth");
    if (!in_chain && !in_budget) {
      throw ConfigError("chain.depth", "missing");
    }
    std::size_t d = in_chain ? get_unsigned(ch, "depth", "chain", 0) : std::numeric_limits<std::size_t>::max();
    if (in_budget) {
      d = std::min<std::size_t>(d, get_unsigned(*budget_obj, "depth", "budgets", 0));
    }
    return d;
  };
  json const* chain = find(j, "chain");
  if (!chain) {
    throw ConfigError("chain", "missing chain spec");
  }
  if (!chain->is_object()) {
    throw ConfigError("chain", "expected an object");
  }
  c.chain.kind = get_string(*chain, "kind", "chain");
  if (c.chain.kind == "derived") {
    c.chain.prime = static_cast<std::uint32_t>(get_unsigned(*chain, "prime", "chain", 2));
    try {
      Field::prime(c.chain.prime);
    } catch (InvalidArgument const&) {
      throw ConfigError("chain.prime", "not a prime");
    }
    c.chain.depth = chain_depth(*chain);
  } else if (c.chain.kind == "abelian-powers") {
    c.chain.base = get_unsigned(*chain, "base", "chain", 2);
    if (c.chain.base < 2) {
      throw ConfigError("chain.base", "must be at least 2");
    }
    c.chain.depth = chain_depth(*chain);
    if (std::pow(static_cast<double>(c.chain.base), static_cast<double>(c.chain.depth)) > 1e15) {
      throw ConfigError("chain.depth", "moduli too large");
    }
  } else if (c.chain.kind == "homs") {
    if (json const* h = find(*chain, "homs")) {
      if (h->is_string()) {
        c.chain.homs = h->get<std::string>();
      } else if (h->is_array()) {
        for (auto const& line : *h) {
          if (!line.is_string()) {
            throw ConfigError("chain.homs", "expected strings");
          }
          c.chain.homs += line.get<std::string>() + "\n";
        }
      } else {
        throw ConfigError("chain.homs", "expected a string or a list of strings");
      }
    } else if (find(*chain, "homs_file")) {
      c.chain.homs = read_file(resolve(get_string(*chain, "homs_file", "chain")), "chain.homs_file");
    } else {
      throw ConfigError("chain.homs", "missing");
    }
    std::vector<LevelHom> homs;
    try {
      homs = parse_chain_homs(c.chain.homs, p);
    } catch (ParseError const& e) {
      throw ConfigError("chain.homs", e.what());
    }
    c.chain.depth = homs.size();
    if (find(*chain, "depth") || (budget_obj && budget_obj->is_object() && find(*budget_obj, "depth"))) {
      c.chain.depth = std::min(homs.size(), chain_depth(*chain));
    }
    if (needs_normal_chain(c.task)) {
      for (std::size_t n = 0; n < homs.size(); ++n) {
        auto const* perm = std::get_if<PermSubgroup>(&homs[n]);
        if (perm && perm->stabilized_point) {
          throw ConfigError("chain.homs", "level " + std::to_string(n + 1) +
                                              " is a point stabiliser, which need not be "
                                              "normal; " + c.task +
                                              " needs a normal chain (use kernels)");
        }
      }
    }
  } else if (c.chain.kind.empty()) {
    throw ConfigError("chain.kind", "missing");
  } else {
    throw ConfigError("chain.kind", "expected derived, abelian-powers or homs");
  }

  std::uint64_t default_cap = 1'000'000;
  if (char const* env = std::getenv("RGKIT_BUDGET")) {
    try {
      default_cap = std::stoull(env);
    } catch (std::exception const&) {
      throw ConfigError("RGKIT_BUDGET", "expected a positive integer");
    }
    if (default_cap == 0) {
      throw ConfigError("RGKIT_BUDGET", "expected a positive integer");
    }
  }
  json const empty = json::object();
  json const* b = find(j, "budgets");
  if (b && !b->is_object()) {
    throw ConfigError("budgets", "expected an object");
  }
  json const& budgets = b ? *b : empty;
  c.budgets.max_cosets = get_unsigned(budgets, "max_cosets", "budgets", default_cap, true);
  c.budgets.effort = get_unsigned(budgets, "effort", "budgets", 2000, true);
  c.budgets.tietze_passes = get_unsigned(budgets, "tietze_passes", "budgets", 100000, true);

  json const* o = find(j, "outputs");
  if (o && !o->is_object()) {
    throw ConfigError("outputs", "expected an object");
  }
  json const& outputs = o ? *o : empty;
  c.outputs.json = get_string(outputs, "json", "outputs");
  c.outputs.csv = get_string(outputs, "csv", "outputs");
  c.outputs.transversal = get_string(outputs, "transversal", "outputs");
  c.outputs.split = get_string(outputs, "split", "outputs");
  c.seed = get_unsigned(j, "seed", "", 0);

  if (json const* params = find(j, "params")) {
    if (!params->is_object()) {
      throw ConfigError("params", "expected an object");
    }
    c.params = *params;
  }
  json& params = c.params;
  if (c.task == "split-search") {
    double const alpha = require_number(params, "alpha", "params");
    double const eps = require_number(params, "eps", "params");
    if (!(alpha > 0 && alpha < 1)) {
      throw ConfigError("params.alpha", "must lie strictly between 0 and 1");
    }
    if (!(eps > 0)) {
      throw ConfigError("params.eps", "must be positive");
    }
  } else if (c.task == "weiss") {
    json const* f = find(params, "folner");
    if (!f || !f->is_object()) {
      throw ConfigError("params.folner", "missing Folner set");
    }
    folner_words(*f, p.generator_count(), p);
    make_model(get_string(params, "model", "params", "free-abelian"), p.generator_count());
  } else if (c.task == "lueck") {
    if (!find(params, "matrix")) {
      if (!find(params, "matrix_file")) {
        throw ConfigError("params.matrix", "missing");
      }
      params["matrix"] = read_file(resolve(get_string(params, "matrix_file", "params")),
                                   "params.matrix_file");
      params.erase("matrix_file");
    }
    try {
      parse_group_algebra_matrix(get_string(params, "matrix", "params"), p);
    } catch (ParseError const& e) {
      throw ConfigError("params.matrix", e.what());
    }
    if (find(params, "field")) {
      parse_field(get_string(params, "field", "params"), "params.field");
    }
  } else if (c.task == "bg-probe") {
    require_unsigned(params, "t", "params", true);
  } else if (c.task == "freeprod-check") {
    generator_indices(params, "factor1", p);
    generator_indices(params, "factor2", p);
  }
  return c;
}

RunOutcome run(ExperimentConfig const& cfg) {
  auto p = presentation_of(cfg);
  Chain c = build_chain(cfg, p);
  TaskOutput t;
  if (cfg.task == "rank-gradient") {
    t = run_rank_gradient(cfg, c);
  } else if (cfg.task == "split-search") {
    t = run_split_search(cfg, c);
  } else if (cfg.task == "weiss") {
    t = run_weiss(cfg, c);
  } else if (cfg.task == "lueck") {
    t = run_lueck(cfg, c);
  } else if (cfg.task == "bg-probe") {
    t = run_bg_probe(cfg, c);
  } else {
    t = run_freeprod(cfg, c);
  }
  RunOutcome out;
  out.report = envelope(cfg);
  ordered_json indices = ordered_json::array();
  for (auto const& l : c.levels()) {
    indices.push_back(l.index());
  }
  out.report["chain"] = {{"depth", c.depth()}, {"indices", indices}, {"truncated", c.truncated()}};
  if (c.truncated()) {
    out.report["chain"]["truncation"] = c.truncation_reason();
    out.exit_code = kBudgetExhausted;
  }
  if (t.failed_check) {
    out.exit_code = kInvariantFailure;
  }
  out.report["result"] = std::move(t.result);
  out.csv = std::move(t.csv);
  if (!cfg.outputs.json.empty()) {
    write_file(cfg.outputs.json, out.report.dump(2) + "\n");
  }
  if (!cfg.outputs.csv.empty() && !out.csv.empty()) {
    write_file(cfg.outputs.csv, out.csv);
  }
  return out;
}

ordered_json verify(ExperimentConfig const& cfg) {
  auto p = presentation_of(cfg);
  ordered_json j = envelope(cfg);
  j["status"] = "ok";
  j["max_cosets"] = cfg.budgets.max_cosets;
  // Index upper bounds per level, computed from the config alone.
  std::vector<double> bounds;
  if (cfg.chain.kind == "derived") {
    double index = 1, rank = static_cast<double>(p->generator_count());
    for (std::size_t n = 1; n <= cfg.chain.depth; ++n) {
      index *= std::pow(static_cast<double>(cfg.chain.prime), rank);
      rank = (static_cast<double>(p->generator_count()) - 1) * index + 1;
      bounds.push_back(index);
    }
  } else {
    for (LevelHom const& h : chain_homs(cfg.chain, *p)) {
      if (auto const* a = std::get_if<AbelianHom>(&h)) {
        double prod = 1;
        for (auto m : a->moduli) {
          prod *= static_cast<double>(m);
        }
        bounds.push_back(prod);
      } else {
        auto const& perm = std::get<PermSubgroup>(h);
        bounds.push_back(perm.stabilized_point ? static_cast<double>(perm.degree)
                                               : std::tgamma(static_cast<double>(perm.degree) + 1));
      }
    }
  }
  j["levels"] = ordered_json::array();
  for (std::size_t n = 0; n < bounds.size(); ++n) {
    ordered_json l = {{"level", n + 1}};
    l["index_upper_bound"] = count_json(bounds[n]);
    l["within_budget"] = bounds[n] <= static_cast<double>(cfg.budgets.max_cosets);
    j["levels"].push_back(l);
  }
  if (cfg.task == "lueck") {
    GroupAlgebraMatrix a = config_matrix(cfg, *p);
    j["matrix"] = {{"n", a.rows}, {"m", a.cols}, {"field", a.field.name()}};
    ordered_json sizes = ordered_json::array();
    for (std::size_t n = 0; n < bounds.size(); ++n) {
      sizes.push_back({{"level", n + 1},
                       {"rows_upper_bound", count_json(bounds[n] * static_cast<double>(a.rows))},
                       {"cols_upper_bound", count_json(bounds[n] * static_cast<double>(a.cols))}});
    }
    j["matrix_sizes"] = sizes;
  }
  return j;
}

ordered_json error_record(int exit_code, std::string const& kind, std::string const& message,
                          std::string const& field) {
  ordered_json e = {{"kind", kind}, {"message", message}};
  if (!field.empty()) {
    e["field"] = field;
  }
  return {{"error", e}, {"exit_code", exit_code}};
}

int main_entry(int argc, char const* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank gradient and approximation experiments on finitely presented groups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Flags {
    std::string config, task, presentation, presentation_file, chain_kind;
    std::optional<std::size_t> depth, max_cosets, effort;
    std::optional<std::uint32_t> prime;
    std::optional<std::uint64_t> seed;
    std::string json, csv, transversal, split;
    std::vector<std::string> params;
  } f;

  std::vector<CLI::App*> subs;
  auto add = [&](std::string const& name, std::string const& what) {
    CLI::App* s = app.add_subcommand(name, what);
    s->add_option("--config,-c", f.config, "JSON experiment config");
    s->add_option("--presentation", f.presentation, "presentation text");
    s->add_option("--presentation-file", f.presentation_file, "presentation file");
    s->add_option("--chain", f.chain_kind, "chain kind: derived, abelian-powers, homs");
    s->add_option("--depth", f.depth, "chain depth");
    s->add_option("--prime", f.prime, "prime of a derived chain");
    s->add_option("--max-cosets", f.max_cosets, "coset budget");
    s->add_option("--effort", f.effort, "search effort");
    s->add_option("--seed", f.seed, "seed for search order");
    s->add_option("--json", f.json, "JSON report path");
    s->add_option("--csv", f.csv, "CSV path");
    s->add_option("--transversal", f.transversal, "transversal output (weiss)");
    s->add_option("--split", f.split, "split export (split-search)");
    s->add_option("--param,-p", f.params, "task parameter key=value; value read as JSON when it parses");
    subs.push_back(s);
    return s;
  };
  add("rank-gradient", "rank bounds along a chain");
  add("split-search", "search for an almost invariant vertex set and split");
  add("weiss", "almost invariant transversals and Schreier generators");
  add("lueck", "kernel dimensions of a group algebra matrix along a chain");
  add("bg-probe", "mod-2 ranks against the bounded generation bound");
  add("freeprod-check", "free product rank formula against direct computation");
  add("verify", "validate a config and estimate sizes")
      ->add_option("--task", f.task, "task to validate (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands()[0]->help());
      return kOk;
    }
    err << error_record(kConfigError, "usage", e.what()).dump() << "\n";
    return kConfigError;
  }
  std::string const sub = app.get_subcommands().at(0)->get_name();

  std::string json_path = f.json;
  try {
    json j = json::object();
    std::filesystem::path base = std::filesystem::current_path();
    if (!f.config.empty()) {
      try {
        j = json::parse(read_file(f.config, "config"));
      } catch (json::parse_error const& e) {
        throw ConfigError("config", e.what());
      }
      base = std::filesystem::path(f.config).parent_path();
    }
    if (!j.is_object()) {
      throw ConfigError("config", "expected a JSON object");
    }
    if (sub != "verify") {
      j["task"] = sub;
    } else if (!f.task.empty()) {
      j["task"] = f.task;
    }
    if (!f.presentation.empty()) {
      j.erase("presentation_file");
      j["presentation"] = f.presentation;
    }
    if (!f.presentation_file.empty()) {
      j.erase("presentation");
      j["presentation_file"] = std::filesystem::absolute(f.presentation_file).string();
    }
    if (!f.chain_kind.empty() || f.depth || f.prime) {
      if (!j.contains("chain") || !j["chain"].is_object()) {
        j["chain"] = json::object();
      }
      if (!f.chain_kind.empty()) j["chain"]["kind"] = f.chain_kind;
      if (f.depth) j["chain"]["depth"] = *f.depth;
      if (f.prime) j["chain"]["prime"] = *f.prime;
    }
    if (f.max_cosets || f.effort) {
      if (!j.contains("budgets") || !j["budgets"].is_object()) {
        j["budgets"] = json::object();
      }
      if (f.max_cosets) j["budgets"]["max_cosets"] = *f.max_cosets;
      if (f.effort) j["budgets"]["effort"] = *f.effort;
    }
    if (f.seed) {
      j["seed"] = *f.seed;
    }
    for (auto [path, key] : {std::pair{&f.json, "json"}, std::pair{&f.csv, "csv"},
                             std::pair{&f.transversal, "transversal"},
                             std::pair{&f.split, "split"}}) {
      if (!path->empty()) {
        if (!j.contains("outputs") || !j["outputs"].is_object()) {
          j["outputs"] = json::object();
        }
        j["outputs"][key] = *path;
      }
    }
    for (std::string const& kv : f.params) {
      auto const eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError("params", "expected key=value, got " + kv);
      }
      if (!j.contains("params") || !j["params"].is_object()) {
        j["params"] = json::object();
      }
      std::string const value = kv.substr(eq + 1);
      json v = json::parse(value, nullptr, false);
      j["params"][kv.substr(0, eq)] = v.is_discarded() ? json(value) : v;
    }
    if (j.contains("outputs") && j["outputs"].is_object() && j["outputs"].contains("json") &&
        j["outputs"]["json"].is_string()) {
      json_path = j["outputs"]["json"].get<std::string>();
    }

    ExperimentConfig cfg = load_config(j, base);
    if (sub == "verify") {
      out << verify(cfg).dump(2) << "\n";
      return kOk;
    }
    RunOutcome r = run(cfg);
    if (cfg.outputs.json.empty()) {
      out << r.report.dump(2) << "\n";
    } else {
      out << "wrote " << cfg.outputs.json << "\n";
    }
    return r.exit_code;
  } catch (...) {
    int code = kOther;
    std::string kind = "error", message, field;
    try {
      throw;
    } catch (ConfigError const& e) {
      code = kConfigError, kind = "config", message = e.what(), field = e.field();
    } catch (ParseError const& e) {
      code = kConfigError, kind = "parse", message = e.what();
    } catch (InvalidArgument const& e) {
      code = kConfigError, kind = "invalid-argument", message = e.what();
    } catch (BudgetExhausted const& e) {
      code = kBudgetExhausted, kind = "budget-exhausted", message = e.what();
    } catch (InvariantViolation const& e) {
      code = kInvariantFailure, kind = "invariant-violation", message = e.what();
    } catch (std::exception const& e) {
      message = e.what();
    }
    ordered_json rec = error_record(code, kind, message, field);
    err << rec.dump() << "\n";
    if (!json_path.empty() && sub != "verify") {
      try {
        write_file(json_path, rec.dump(2) + "\n");
      } catch (std::exception const&) {
      }
    }
    return code;
  }
}

}  // namespace rgkit::cli
