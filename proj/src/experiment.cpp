#include "spemb/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "spemb/error.hpp"
#include "spemb/util.hpp"

namespace spemb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

json yaml_to_json(const YAML::Node& node, const std::string& path) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (std::size_t i = 0; i < node.size(); ++i) out.push_back(yaml_to_json(node[i], path + "[" + std::to_string(i) + "]"));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (out.contains(key)) throw Error(ErrorCode::config, path + ": duplicate key '" + key + "'");
        out[key] = yaml_to_json(kv.second, path.empty() ? key : path + "." + key);
      }
      return out;
    }
    case YAML::NodeType::Scalar: {
      const std::string& text = node.Scalar();
      if (node.Tag() == "!") return text;  // quoted
      static const std::regex integer(R"([-+]?[0-9]+)");
      static const std::regex real(R"([-+]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][-+]?[0-9]+)?)");
      if (std::regex_match(text, integer)) {
        try {
          return std::stoll(text);
        } catch (const std::out_of_range&) {
          return std::stod(text);
        }
      }
      if (std::regex_match(text, real)) return std::stod(text);
      if (text == "true") return true;
      if (text == "false") return false;
      if (text == "null" || text == "~") return nullptr;
      return text;
    }
  }
  return nullptr;
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number()) fail_key(key, "expected a number");
    return v.get<double>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail_key(key, "expected an integer");
    return v.get<std::int64_t>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) fail_key(key, "expected a string");
    return v.get<std::string>();
  }
  std::vector<int> int_list(const std::string& key, const std::vector<int>& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_array()) fail_key(key, "expected a list of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail_key(key, "expected a list of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }
  std::vector<double> number_list(const std::string& key, const std::vector<double>& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_array()) fail_key(key, "expected a list of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail_key(key, "expected a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Point point(const std::string& key, Point fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && (v.size() == 1 || v.size() == 2) && v[0].is_number() && v.back().is_number()) {
      return {v[0].get<double>(), v.size() == 2 ? v[1].get<double>() : 0.0};
    }
    fail_key(key, "expected a number or [x, y]");
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw Error(ErrorCode::config, sub(key) + ": unknown key");
    }
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::config, (path_.empty() ? std::string("config") : path_) + ": " + msg);
  }
  [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const {
    throw Error(ErrorCode::config, sub(key) + ": " + msg);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::map<std::string, std::set<std::string>>& distribution_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"delta", {"x0"}},
      {"delta_derivative", {"x0"}},
      {"sawtooth", {}},
      {"sobolev_noise", {"s", "seed"}},
      {"poisson_smooth", {"r"}},
      {"trig_poly", {"terms"}},
      {"cutoff", {"center", "inner", "outer"}},
      {"bump", {"center", "outer"}},
      {"zero", {}},
  };
  return keys;
}

bool valid_id(const std::string& id) {
  static const std::regex re(R"([A-Za-z0-9][A-Za-z0-9_.-]*)");
  return std::regex_match(id, re);
}

DistributionSpec parse_distribution(const json& j, const std::string& path, bool& explicit_seed) {
  Reader r(j, path);
  DistributionSpec d;
  d.name = r.string("name", "");
  const auto& keys = distribution_keys();
  const auto it = keys.find(d.name);
  if (it == keys.end()) r.fail_key("name", "unknown catalog entry '" + d.name + "'");
  d.id = r.string("id", d.name);
  if (!valid_id(d.id)) r.fail_key("id", "ids use letters, digits, '_', '-' and '.'");
  for (const auto& [key, value] : j.items()) {
    if (key != "id" && key != "name" && !it->second.count(key)) {
      throw Error(ErrorCode::config, r.sub(key) + ": not a parameter of " + d.name);
    }
  }
  d.x0 = r.point("x0", {});
  d.s = r.number("s", 0.0);
  explicit_seed = r.has("seed");
  d.seed = static_cast<std::uint64_t>(r.integer("seed", 1));
  d.r = r.number("r", 0.5);
  d.center = r.point("center", {});
  d.inner = r.number("inner", 0.0);
  d.outer = r.number("outer", 0.0);
  if (r.has("terms")) {
    const json& terms = r.at("terms");
    if (!terms.is_array() || terms.empty()) r.fail_key("terms", "expected a nonempty list");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      Reader t(terms[i], r.sub("terms") + "[" + std::to_string(i) + "]");
      TrigTerm term;
      if (!t.has("k")) t.fail("missing k");
      const json& k = t.at("k");
      if (k.is_number_integer()) {
        term.k1 = k.get<std::int32_t>();
      } else if (k.is_array() && k.size() == 2 && k[0].is_number_integer() && k[1].is_number_integer()) {
        term.k1 = k[0].get<std::int32_t>();
        term.k2 = k[1].get<std::int32_t>();
      } else {
        t.fail_key("k", "expected an integer or [k1, k2]");
      }
      term.kind = t.string("kind", "cos");
      if (term.kind != "cos" && term.kind != "sin") t.fail_key("kind", "expected cos or sin");
      term.amp = t.number("amp", 1.0);
      t.finish();
      d.terms.push_back(term);
    }
  } else if (d.name == "trig_poly") {
    r.fail_key("terms", "trig_poly needs terms");
  }
  r.finish();
  return d;
}

TaperShape parse_shape(Reader& parent, const std::string& key) {
  TaperShape shape;
  if (!parent.has(key)) return shape;
  Reader r(parent.at(key), parent.sub(key));
  shape.exponent = static_cast<int>(r.integer("exponent", shape.exponent));
  shape.end_ratio = r.number("end_ratio", shape.end_ratio);
  r.finish();
  if (shape.exponent < 1) r.fail_key("exponent", "must be at least 1");
  if (!(shape.end_ratio > 1.0)) r.fail_key("end_ratio", "must exceed 1");
  return shape;
}

SymbolConfig parse_symbol(const json& j, const std::string& path) {
  SymbolConfig s;
  if (j.is_string()) {
    s.type = j.get<std::string>();
  } else {
    Reader r(j, path);
    s.type = r.string("type", "plateau");
    const std::map<std::string, std::set<std::string>> allowed = {
        {"plateau", {"t", "shape"}}, {"heat", {}}, {"taylor", {"order"}}, {"zero", {}},
        {"admissible", {"schedule", "shape", "level"}}};
    const auto it = allowed.find(s.type);
    if (it == allowed.end()) r.fail_key("type", "unknown symbol type '" + s.type + "'");
    for (const auto& [key, value] : j.items()) {
      if (key != "type" && !it->second.count(key)) throw Error(ErrorCode::config, r.sub(key) + ": not a parameter of " + s.type);
    }
    s.t = r.number("t", 1.0);
    s.order = static_cast<int>(r.integer("order", 2));
    s.level = static_cast<int>(r.integer("level", 0));
    s.shape = parse_shape(r, "shape");
    if (r.has("schedule")) {
      const json& sj = r.at("schedule");
      std::string kind;
      if (sj.is_string()) {
        kind = sj.get<std::string>();
      } else {
        Reader sr(sj, r.sub("schedule"));
        kind = sr.string("kind", "log");
        s.schedule.value = sr.number("value", 1.0);
        sr.finish();
      }
      if (kind == "log") s.schedule.kind = ScheduleKind::log;
      else if (kind == "exp_sqrt_log") s.schedule.kind = ScheduleKind::exp_sqrt_log;
      else if (kind == "constant") s.schedule.kind = ScheduleKind::constant;
      else if (kind == "power") s.schedule.kind = ScheduleKind::power;
      else r.fail_key("schedule", "unknown schedule '" + kind + "'");
    }
    r.finish();
  }
  if (s.type != "plateau" && s.type != "heat" && s.type != "taylor" && s.type != "zero" && s.type != "admissible") {
    throw Error(ErrorCode::config, path + ": unknown symbol type '" + s.type + "'");
  }
  if (!(s.t > 0.0)) throw Error(ErrorCode::config, path + ".t: must be positive");
  if (s.order < 1) throw Error(ErrorCode::config, path + ".order: must be at least 1");
  if (s.level < 0) throw Error(ErrorCode::config, path + ".level: must be nonnegative");
  return s;
}

SeminormBattery parse_battery_node(const json& j, const std::string& path) {
  if (j.is_string()) return parse_battery(j.get<std::string>());
  Reader r(j, path);
  SeminormBattery b;
  b.sobolev_orders = r.int_list("sobolev", b.sobolev_orders);
  b.sup_orders = r.int_list("sup", b.sup_orders);
  b.grid_resolution = static_cast<std::size_t>(r.integer("grid_resolution", 0));
  r.finish();
  return b;
}

IsometryConfig parse_isometry(const json& j, const std::string& path) {
  IsometryConfig iso;
  if (j.is_string()) {
    iso.type = j.get<std::string>();
  } else {
    Reader r(j, path);
    iso.type = r.string("type", "identity");
    iso.angle = r.number("angle", 0.0);
    iso.shift = r.point("shift", {});
    r.finish();
  }
  static const std::set<std::string> types = {"identity", "rotation", "reflection", "translation", "axis_swap",
                                              "reflect_x", "polar_rotation", "polar_reflection"};
  if (!types.count(iso.type)) throw Error(ErrorCode::config, path + ": unknown isometry '" + iso.type + "'");
  return iso;
}

Isometry build_isometry(const IsometryConfig& c) {
  if (c.type == "rotation") return Isometry::rotation(c.angle);
  if (c.type == "reflection") return Isometry::reflection();
  if (c.type == "translation") return Isometry::translation(c.shift.x, c.shift.y);
  if (c.type == "axis_swap") return Isometry::axis_swap();
  if (c.type == "reflect_x") return Isometry::reflect_x();
  if (c.type == "polar_rotation") return Isometry::polar_rotation(c.angle);
  if (c.type == "polar_reflection") return Isometry::polar_reflection();
  return Isometry::identity();
}

VerifyConfig parse_verify(const json& j, const std::string& path, const std::string& manifold) {
  Reader r(j, path);
  VerifyConfig v;
  if (r.has("isometries")) {
    const json& a = r.at("isometries");
    if (!a.is_array()) r.fail_key("isometries", "expected a list");
    for (std::size_t i = 0; i < a.size(); ++i) v.isometries.push_back(parse_isometry(a[i], r.sub("isometries") + "[" + std::to_string(i) + "]"));
  }
  if (r.has("support")) {
    Reader s(r.at("support"), r.sub("support"));
    if (s.has("targets")) {
      const json& t = s.at("targets");
      if (!t.is_array()) s.fail_key("targets", "expected a list of ids");
      for (const auto& e : t) {
        if (!e.is_string()) s.fail_key("targets", "expected a list of ids");
        v.support_targets.push_back(e.get<std::string>());
      }
    }
    v.support_distances = s.number_list("distances", v.support_distances);
    s.finish();
  }
  if (r.has("singsupp")) {
    const json& a = r.at("singsupp");
    if (!a.is_array()) r.fail_key("singsupp", "expected a list");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = r.sub("singsupp") + "[" + std::to_string(i) + "]";
      Reader c(a[i], p);
      SingSuppCase sc;
      sc.target = c.string("target", "");
      if (sc.target.empty()) c.fail("missing target");
      if (!c.has("cutoff")) c.fail("missing cutoff");
      Reader k(c.at("cutoff"), c.sub("cutoff"));
      sc.cutoff.name = "cutoff";
      sc.cutoff.id = k.string("id", "cutoff" + std::to_string(i));
      if (!valid_id(sc.cutoff.id)) k.fail_key("id", "ids use letters, digits, '_', '-' and '.'");
      sc.cutoff.center = k.point("center", {});
      sc.cutoff.inner = k.number("inner", 0.0);
      sc.cutoff.outer = k.number("outer", 0.0);
      k.finish();
      c.finish();
      v.singsupp.push_back(sc);
    }
  }
  if (r.has("mult")) {
    Reader m(r.at("mult"), r.sub("mult"));
    v.mult_f = m.string("f", "");
    v.mult_g = m.string("g", v.mult_f);
    m.finish();
  }
  if (r.has("staged")) {
    Reader s(r.at("staged"), r.sub("staged"));
    v.staged_levels = s.int_list("levels", v.staged_levels);
    s.finish();
    for (int l : v.staged_levels) {
      if (l < 1 || l > 4) throw Error(ErrorCode::config, r.sub("staged.levels") + ": levels run from 1 to 4");
    }
  }
  if (r.has("order")) {
    Reader o(r.at("order"), r.sub("order"));
    if (o.has("expect")) {
      const json& e = o.at("expect");
      if (e.is_number_integer()) v.expect_order = std::to_string(e.get<int>());
      else if (e.is_string() && e.get<std::string>() == "special") v.expect_order = "special";
      else o.fail_key("expect", "expected an integer or \"special\"");
    }
    o.finish();
  }
  r.finish();
  (void)manifold;
  return v;
}

void validate(const ExperimentConfig& cfg) {
  const ManifoldPtr man = make_manifold(cfg.manifold);
  std::set<std::string> ids;
  for (const auto* list : {&cfg.distributions, &cfg.smooth}) {
    for (const auto& d : *list) {
      if (!ids.insert(d.id).second) throw Error(ErrorCode::config, "duplicate distribution id '" + d.id + "'");
    }
  }
  for (const auto& d : cfg.smooth) {
    if (!describe_distribution(*man, d).smooth) {
      throw Error(ErrorCode::config, "smooth." + d.id + ": '" + d.name + "' is not a smooth catalog entry");
    }
  }
  for (const auto& d : cfg.distributions) describe_distribution(*man, d);
  if (cfg.battery) cfg.battery->validate(*man);
  for (const auto& t : cfg.verify.support_targets) {
    if (!ids.count(t)) throw Error(ErrorCode::config, "verify.support.targets: unknown id '" + t + "'");
  }
  for (const auto& c : cfg.verify.singsupp) {
    if (!ids.count(c.target)) throw Error(ErrorCode::config, "verify.singsupp: unknown target '" + c.target + "'");
  }
  for (const auto* id : {&cfg.verify.mult_f, &cfg.verify.mult_g}) {
    if (!id->empty() && !ids.count(*id)) throw Error(ErrorCode::config, "verify.mult: unknown id '" + *id + "'");
  }
  if (cfg.grid.count && *cfg.grid.count < 8) throw Error(ErrorCode::config, "grid.count: at least 8 points");
  if (cfg.spectrum.points < 2) throw Error(ErrorCode::config, "spectrum.points: at least 2");
  if (cfg.perturb && (cfg.perturb->cap < 1 || cfg.perturb->rank < 1 || !(cfg.perturb->amplitude >= 0.0))) {
    throw Error(ErrorCode::config, "perturb: cap and rank must be positive, amplitude nonnegative");
  }
}

// ---------------------------------------------------------------- canonical form

json point_json(const Point& p) { return json::array({p.x, p.y}); }

json distribution_json(const DistributionSpec& d) {
  json j;
  j["id"] = d.id;
  j["name"] = d.name;
  const auto& keys = distribution_keys().at(d.name);
  if (keys.count("x0")) j["x0"] = point_json(d.x0);
  if (keys.count("s")) j["s"] = d.s;
  if (keys.count("seed")) j["seed"] = d.seed;
  if (keys.count("r")) j["r"] = d.r;
  if (keys.count("center")) j["center"] = point_json(d.center);
  if (keys.count("inner")) j["inner"] = d.inner;
  if (keys.count("outer")) j["outer"] = d.outer;
  if (keys.count("terms")) {
    j["terms"] = json::array();
    for (const auto& t : d.terms) j["terms"].push_back({{"k", json::array({t.k1, t.k2})}, {"kind", t.kind}, {"amp", t.amp}});
  }
  return j;
}

std::string schedule_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::log: return "log";
    case ScheduleKind::exp_sqrt_log: return "exp_sqrt_log";
    case ScheduleKind::power: return "power";
  }
  return "log";
}

json config_json(const ExperimentConfig& cfg) {
  const ManifoldPtr man = make_manifold(cfg.manifold);
  json j;
  j["manifold"] = man->name();
  json s;
  s["type"] = cfg.symbol.type;
  if (cfg.symbol.type == "plateau") {
    s["t"] = cfg.symbol.t;
    s["shape"] = {{"exponent", cfg.symbol.shape.exponent}, {"end_ratio", cfg.symbol.shape.end_ratio}};
  } else if (cfg.symbol.type == "taylor") {
    s["order"] = cfg.symbol.order;
  } else if (cfg.symbol.type == "admissible") {
    s["schedule"] = {{"kind", schedule_name(cfg.symbol.schedule.kind)}, {"value", cfg.symbol.schedule.value}};
    s["shape"] = {{"exponent", cfg.symbol.shape.exponent}, {"end_ratio", cfg.symbol.shape.end_ratio}};
    s["level"] = cfg.symbol.level;
  }
  j["symbol"] = s;
  j["distributions"] = json::array();
  for (const auto& d : cfg.distributions) j["distributions"].push_back(distribution_json(d));
  j["smooth"] = json::array();
  for (const auto& d : cfg.smooth) j["smooth"].push_back(distribution_json(d));
  const SeminormBattery b = cfg.battery.value_or(SeminormBattery::defaults(*man));
  j["battery"] = {{"sobolev", b.sobolev_orders}, {"sup", b.sup_orders}, {"grid_resolution", b.grid_resolution}};
  const EpsilonGrid grid = grid_designer(cfg.grid, *man).grid;
  j["grid"] = {{"hi", grid.samples().front()}, {"lo", grid.samples().back()}, {"count", grid.size()}};
  j["seed"] = cfg.seed;
  j["perturb"] = cfg.perturb ? json{{"amplitude", cfg.perturb->amplitude}, {"cap", cfg.perturb->cap}, {"rank", cfg.perturb->rank}}
                             : json(nullptr);
  j["spectrum"] = {{"lambda_min", cfg.spectrum.lambda_min ? json(*cfg.spectrum.lambda_min) : json(nullptr)},
                   {"lambda_max", cfg.spectrum.lambda_max ? json(*cfg.spectrum.lambda_max) : json(nullptr)},
                   {"points", cfg.spectrum.points}};
  json v;
  v["isometries"] = json::array();
  for (const auto& i : cfg.verify.isometries) v["isometries"].push_back({{"type", i.type}, {"angle", i.angle}, {"shift", point_json(i.shift)}});
  v["support"] = {{"targets", cfg.verify.support_targets}, {"distances", cfg.verify.support_distances}};
  v["singsupp"] = json::array();
  for (const auto& c : cfg.verify.singsupp) v["singsupp"].push_back({{"target", c.target}, {"cutoff", distribution_json(c.cutoff)}});
  v["mult"] = {{"f", cfg.verify.mult_f}, {"g", cfg.verify.mult_g}};
  v["staged"] = {{"levels", cfg.verify.staged_levels}};
  v["order"] = {{"expect", cfg.verify.expect_order ? json(*cfg.verify.expect_order) : json(nullptr)}};
  j["verify"] = v;
  return j;
}

// ---------------------------------------------------------------- outputs

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::io, "cannot write " + p.string());
  os << text;
  if (!os) throw Error(ErrorCode::io, "write failed for " + p.string());
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error(ErrorCode::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Run {
 public:
  Run(const ExperimentConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)), dir_(cfg.output) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw Error(ErrorCode::io, "cannot create output directory " + dir_.string());
    start_ = std::chrono::steady_clock::now();
    stage_start_ = start_;
  }

  const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& text) {
    write_file(dir_ / name, text);
    outputs_.push_back(name);
  }
  void warn(const std::string& w) {
    if (std::find(warnings_.begin(), warnings_.end(), w) == warnings_.end()) warnings_.push_back(w);
    std::cerr << "warning: " << w << "\n";
  }
  void stage(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    stages_.emplace_back(name, std::chrono::duration<double>(now - stage_start_).count());
    stage_start_ = now;
  }
  void set_grid(const EpsilonGrid& g) { grid_ = g.samples(); }

  // Manifest entries of earlier commands with the same config are kept.
  void finish() {
    stage("total");
    const std::string hash = config_hash(cfg_);
    json manifest;
    const fs::path mp = dir_ / "manifest.json";
    if (fs::exists(mp)) {
      try {
        json old = json::parse(read_file(mp));
        if (old.value("config_hash", "") == hash) manifest = old;
      } catch (const json::exception&) {
      }
    }
    manifest["tool"] = "spemb";
    manifest["version"] = kToolVersion;
    manifest["config_hash"] = hash;
    manifest["config"] = config_json(cfg_);
    manifest["constants"] = {{"numeric_floor", kNumericFloor},        {"n_max", kOrderCap},
                             {"fit_window", FitPolicy{}.window},      {"min_samples", FitPolicy{}.min_samples},
                             {"preasymptotic_gap", FitPolicy{}.preasymptotic_gap},
                             {"terminal_samples", FitPolicy{}.terminal}};
    manifest["timing_log"] = "timing.log";
    json entry;
    entry["outputs"] = outputs_;
    entry["warnings"] = warnings_;
    if (!grid_.empty()) entry["eps"] = grid_;
    manifest["commands"][command_] = entry;
    write_file(mp, manifest.dump(2) + "\n");

    std::ofstream log(dir_ / "timing.log", std::ios::app);
    for (const auto& [name, secs] : stages_) log << command_ << ' ' << name << ' ' << format_double(secs) << '\n';
  }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  fs::path dir_;
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
  std::vector<double> grid_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point stage_start_;
  std::vector<std::pair<std::string, double>> stages_;
};

std::vector<DistributionSpec> resolved(const ExperimentConfig& cfg, bool smooth) {
  std::vector<DistributionSpec> out = smooth ? cfg.smooth : cfg.distributions;
  const std::size_t offset = smooth ? cfg.distributions.size() : 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t k = offset + i;
    if (k >= cfg.explicit_seed.size() || !cfg.explicit_seed[k]) out[i].seed = cfg.seed;
  }
  return out;
}

const DistributionSpec& find_entry(const std::vector<DistributionSpec>& a, const std::vector<DistributionSpec>& b,
                                   const std::string& id) {
  for (const auto* list : {&a, &b}) {
    for (const auto& d : *list) {
      if (d.id == id) return d;
    }
  }
  throw Error(ErrorCode::config, "unknown distribution id '" + id + "'");
}

json rate_json(const std::string& id, const RateEstimate& r) {
  json j;
  j["seminorm"] = id;
  j["slope"] = r.slope;
  j["r2"] = r.r_squared ? json(*r.r_squared) : json(nullptr);
  j["window_lo"] = r.window_lo;
  j["window_hi"] = r.window_hi;
  j["floor_hit"] = r.floor_hit;
  j["preasymptotic"] = r.preasymptotic;
  if (r.terminal_slope) j["terminal_slope"] = *r.terminal_slope;
  j["verdict"] = r.verdict_string();
  return j;
}

std::vector<std::string> failing_groups(const VerdictReport& rep) {
  std::vector<std::string> out;
  for (const auto& g : rep.groups()) {
    if (!rep.group_pass(g)) out.push_back(g);
  }
  return out;
}

struct Context {
  ManifoldPtr man;
  SymbolNet net;
  EpsilonGrid grid;
  SeminormBattery battery;
  VerifyOptions opts;
  std::vector<DistributionSpec> dists;
  std::vector<DistributionSpec> smooth;
};

Context make_context(const ExperimentConfig& cfg, Run& run) {
  Context c{make_manifold(cfg.manifold), build_symbol_net(cfg.symbol), {}, {}, {}, resolved(cfg, false), resolved(cfg, true)};
  const DesignedGrid dg = grid_designer(cfg.grid, *c.man, &c.net);
  for (const auto& w : dg.warnings) run.warn(w);
  c.grid = dg.grid;
  c.battery = cfg.battery.value_or(SeminormBattery::defaults(*c.man));
  c.battery.validate(*c.man);
  c.opts.perturb = cfg.perturb;
  run.set_grid(c.grid);
  return c;
}

std::string series_csv(const EpsilonGrid& grid, const std::map<std::string, std::vector<double>>& series) {
  std::ostringstream os;
  os << "epsilon,seminorm_id,value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto& [id, v] : series) os << format_double(grid[i]) << ',' << id << ',' << format_double(v[i]) << '\n';
  }
  return os.str();
}

std::string frames_csv(const CoefficientNet& net, std::size_t max_modes) {
  std::ostringstream os;
  os << "epsilon,mode,re,im\n";
  for (std::size_t i = 0; i < net.frames.size(); ++i) {
    const auto& a = net.frames[i].coeffs();
    for (std::size_t n = 0; n < std::min(a.size(), max_modes); ++n) {
      os << format_double(net.grid[i]) << ',' << n << ',' << format_double(a[n].real()) << ','
         << format_double(a[n].imag()) << '\n';
    }
  }
  return os.str();
}

constexpr std::size_t kFrameModes = 256;

VerdictReport verify_order(const Context& c, const ExperimentConfig& cfg) {
  const EmbeddingOrder o = classify_embedding_order(c.net, c.man, c.smooth, c.battery, c.grid, c.opts);
  VerdictReport rep;
  rep.property = "order";
  rep.manifold = c.man->name();
  rep.symbol = c.net.describe();
  for (const auto& d : c.smooth) rep.inputs.push_back(d.id);
  for (const auto& [id, table] : o.tables) {
    ConditionResult r;
    r.group = "defect";
    r.input = id;
    r.id = "defect:" + id;
    const Classification cl = classify_net(table);
    r.verdict = to_string(cl.kind);
    r.pass = true;
    for (const auto& [sid, rate] : table) r.rates.push_back({sid, rate});
    rep.conditions.push_back(std::move(r));
  }
  ConditionResult k;
  k.group = "order";
  k.input = "smooth";
  k.id = "order";
  k.verdict = o.describe();
  k.metric = o.min_slope;
  k.pass = !cfg.verify.expect_order || *cfg.verify.expect_order == o.describe();
  if (cfg.verify.expect_order) k.detail = "expected " + *cfg.verify.expect_order;
  rep.conditions.push_back(std::move(k));
  rep.summary.emplace_back("order", o.describe());
  rep.summary.emplace_back("min_slope", format_double(o.min_slope));
  rep.notes.push_back("order is the integer part of the smallest fitted defect slope plus 0.05");
  return rep;
}

VerdictReport verify_mult(const Context& c, const ExperimentConfig& cfg) {
  if (c.smooth.empty()) throw Error(ErrorCode::config, "verify mult needs smooth entries");
  const std::string fid = cfg.verify.mult_f.empty() ? c.smooth.front().id : cfg.verify.mult_f;
  const std::string gid = cfg.verify.mult_g.empty() ? fid : cfg.verify.mult_g;
  const auto& f = find_entry(c.smooth, c.dists, fid);
  const auto& g = find_entry(c.smooth, c.dists, gid);
  const MultiplicativityResult m = multiplicativity_defect(c.net, c.man, f, g, c.battery, c.grid, c.opts);
  VerdictReport rep;
  rep.property = "mult";
  rep.manifold = c.man->name();
  rep.symbol = c.net.describe();
  rep.inputs = {fid, gid};
  const Classification cl = classify_net(m.table);
  ConditionResult r;
  r.group = "mult";
  r.input = fid + "*" + gid;
  r.id = "mult:" + r.input;
  r.verdict = to_string(cl.kind);
  r.pass = cl.kind == NetClass::negligible;
  for (const auto& [sid, rate] : m.table) r.rates.push_back({sid, rate});
  r.metric = *std::max_element(m.max_abs_defect.begin(), m.max_abs_defect.end());
  rep.conditions.push_back(std::move(r));
  double min_slope = INFINITY;
  for (const auto& [sid, rate] : m.table) {
    if (!rate.negligible()) min_slope = std::min(min_slope, rate.slope);
  }
  rep.summary.emplace_back("min_slope", std::isfinite(min_slope) ? format_double(min_slope) : "negligible");
  return rep;
}

VerdictReport verify_isometry(const Context& c, const ExperimentConfig& cfg) {
  std::vector<Isometry> isos;
  for (const auto& i : cfg.verify.isometries) isos.push_back(build_isometry(i));
  if (isos.empty()) isos = c.man->isometry_group();
  std::vector<DistributionSpec> all = c.dists;
  all.insert(all.end(), c.smooth.begin(), c.smooth.end());
  VerdictReport rep;
  rep.property = "isometry";
  rep.manifold = c.man->name();
  rep.symbol = c.net.describe();
  double worst = 0.0;
  for (const auto& iso : isos) {
    VerdictReport part = check_isometry_invariance(c.net, c.man, iso, all, c.grid);
    if (rep.inputs.empty()) rep.inputs = part.inputs;
    for (auto& cond : part.conditions) {
      worst = std::max(worst, cond.metric.value_or(0.0));
      rep.conditions.push_back(std::move(cond));
    }
  }
  rep.summary.emplace_back("max_err", format_double(worst));
  return rep;
}

VerdictReport verify_regularity(const Context& c) {
  VerdictReport rep;
  rep.property = "regularity";
  rep.manifold = c.man->name();
  rep.symbol = c.net.describe();
  std::vector<std::pair<DistributionSpec, bool>> all;
  for (const auto& d : c.dists) all.emplace_back(d, describe_distribution(*c.man, d).smooth);
  for (const auto& d : c.smooth) all.emplace_back(d, true);
  for (const auto& [d, smooth] : all) {
    rep.inputs.push_back(d.id);
    const SpectralCoefficients u = catalog_for_net(c.net, c.man, d, c.grid);
    const GInfinityResult g = g_infinity_test(embed_entry(c.net, u, c.grid, c.opts), c.battery.sobolev_orders, c.opts.fit);
    ConditionResult r;
    r.group = "regularity";
    r.input = d.id;
    r.id = "regularity:" + d.id;
    r.verdict = to_string(g.verdict);
    r.pass = g.verdict == (smooth ? Regularity::smooth : Regularity::non_smooth);
    r.metric = g.trend_slope;
    std::ostringstream detail;
    detail << "expected=" << (smooth ? "smooth" : "non_smooth") << " range=" << format_double(g.range) << " profile=";
    for (std::size_t i = 0; i < g.profile.size(); ++i) detail << (i ? ";" : "") << format_double(g.profile[i]);
    r.detail = detail.str();
    for (const auto& [sid, rate] : g.rates) r.rates.push_back({sid, rate});
    rep.conditions.push_back(std::move(r));
    for (const auto& n : g.notes) {
      if (std::find(rep.notes.begin(), rep.notes.end(), n) == rep.notes.end() && n.find(" is not O(") == std::string::npos) {
        rep.notes.push_back(n);
      }
    }
  }
  return rep;
}

VerdictReport verify_support(const Context& c, const ExperimentConfig& cfg) {
  std::vector<DistributionSpec> targets;
  if (cfg.verify.support_targets.empty()) {
    for (const auto& d : c.dists) {
      if (describe_distribution(*c.man, d).compact_support) targets.push_back(d);
    }
  } else {
    for (const auto& id : cfg.verify.support_targets) targets.push_back(find_entry(c.dists, c.smooth, id));
  }
  if (targets.empty()) throw Error(ErrorCode::config, "verify support needs a compactly supported distribution");
  VerdictReport rep;
  rep.property = "support";
  rep.manifold = c.man->name();
  rep.symbol = c.net.describe();
  for (const auto& d : targets) {
    rep.inputs.push_back(d.id);
    for (const auto& p : support_localization(c.net, c.man, d, cfg.verify.support_distances, c.grid, c.opts)) {
      ConditionResult r;
      r.group = "support";
      r.input = d.id;
      r.id = "support:" + d.id + ":d=" + format_double(p.distance);
      r.verdict = p.rate.verdict_string();
      r.pass = p.pass;
      r.metric = p.pre_floor_slope;
      r.detail = "pre_floor_slope=" + format_double(p.pre_floor_slope);
      r.rates.push_back({"tail", p.rate});
      rep.conditions.push_back(std::move(r));
    }
  }
  rep.notes.push_back("a probe passes when the tail is negligible and decays with slope at least 8 before the floor");
  return rep;
}

VerdictReport verify_singsupp(const Context& c, const ExperimentConfig& cfg) {
  if (cfg.verify.singsupp.empty()) throw Error(ErrorCode::config, "verify singsupp needs verify.singsupp cases");
  VerdictReport rep;
  rep.property = "singsupp";
  rep.manifold = c.man->name();
  rep.symbol = c.net.describe();
  for (const auto& sc : cfg.verify.singsupp) {
    const auto& u = find_entry(c.dists, c.smooth, sc.target);
    rep.inputs.push_back(u.id + "*" + sc.cutoff.id);
    const SingularSupportResult s = singular_support_test(c.net, c.man, u, sc.cutoff, c.battery.sobolev_orders, c.grid, c.opts);
    ConditionResult r;
    r.group = "singsupp";
    r.input = u.id + "*" + sc.cutoff.id;
    r.id = "singsupp:" + r.input;
    r.verdict = to_string(s.regularity.verdict);
    r.pass = s.pass;
    r.metric = s.regularity.trend_slope;
    r.detail = "expected=" + to_string(s.expected) + " range=" + format_double(s.regularity.range);
    for (const auto& [sid, rate] : s.regularity.rates) r.rates.push_back({sid, rate});
    rep.conditions.push_back(std::move(r));
  }
  return rep;
}

VerdictReport verify_staged(const Context& c, const ExperimentConfig& cfg) {
  if (cfg.symbol.type != "admissible") throw Error(ErrorCode::config, "verify staged needs an admissible symbol");
  const SymbolSequence seq = admissible_from_schedule(cfg.symbol.schedule, cfg.symbol.shape);
  VerdictReport rep;
  rep.property = "staged";
  rep.manifold = c.man->name();
  rep.symbol = SymbolNet::limit(seq).describe();
  for (const auto& d : c.dists) rep.inputs.push_back(d.id);
  for (const auto& d : c.smooth) rep.inputs.push_back(d.id);
  for (const auto& level : check_staged(seq, cfg.verify.staged_levels, c.man, c.dists, c.smooth, c.battery, c.grid, c.opts)) {
    const std::string tag = "l" + std::to_string(level.level);
    for (const auto& [sid, v] : level.sharp) {
      // |x^p (F_k - F)^{(alpha)}| is O(eps^{l + alpha - p}) with alpha = 0 here.
      const int p = sid[1] - '0';
      const double need = level.level - p - 0.2;
      ConditionResult r;
      r.group = tag + ".sharp";
      r.input = sid;
      r.id = tag + ".sharp:" + sid;
      r.verdict = v.estimate.verdict_string();
      r.metric = v.value;
      r.pass = v.value >= need;
      r.detail = "valuation=" + format_double(v.value) + " required=" + format_double(need);
      r.rates.push_back({sid, v.estimate});
      rep.conditions.push_back(std::move(r));
    }
    for (auto cond : level.special.conditions) {
      cond.group = tag + "." + cond.group;
      cond.id = tag + "." + cond.id;
      rep.conditions.push_back(std::move(cond));
    }
  }
  rep.summary.emplace_back("rate_constant_p0a0", format_double(seq.rate_constants().at("p0a0")));
  rep.summary.emplace_back("increment_constant", format_double(seq.increment_constant()));
  rep.summary.emplace_back("design_constant", format_double(seq.design_constant()));
  for (const auto& [alpha, n] : seq.schedule_thresholds()) {
    rep.summary.emplace_back("threshold_alpha_" + format_double(alpha), std::to_string(n));
  }
  rep.notes.push_back("admissibility is measured on p, alpha <= 6 and n <= 1000 only");
  return rep;
}

}  // namespace

// ---------------------------------------------------------------- public API

ExperimentConfig parse_config(const std::string& text, bool is_json) {
  json root;
  if (is_json) {
    try {
      root = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::config, std::string("invalid JSON: ") + e.what());
    }
  } else {
    try {
      root = yaml_to_json(YAML::Load(text), "");
    } catch (const YAML::Exception& e) {
      throw Error(ErrorCode::config, std::string("invalid YAML: ") + e.what());
    }
  }
  if (root.is_null()) throw Error(ErrorCode::config, "config is empty");
  Reader r(root, "");
  ExperimentConfig cfg;
  cfg.manifold = r.string("manifold", cfg.manifold);
  make_manifold(cfg.manifold);
  if (r.has("symbol")) cfg.symbol = parse_symbol(r.at("symbol"), "symbol");
  for (const auto* key : {"distributions", "smooth"}) {
    if (!r.has(key)) continue;
    const json& a = r.at(key);
    if (!a.is_array()) r.fail_key(key, "expected a list");
    for (std::size_t i = 0; i < a.size(); ++i) {
      bool explicit_seed = false;
      DistributionSpec d = parse_distribution(a[i], std::string(key) + "[" + std::to_string(i) + "]", explicit_seed);
      (std::string(key) == "smooth" ? cfg.smooth : cfg.distributions).push_back(d);
    }
  }
  // Seed flags follow the distributions-then-smooth order.
  for (const auto* key : {"distributions", "smooth"}) {
    if (!root.contains(key) || root.at(key).is_null()) continue;
    for (const auto& e : root.at(key)) cfg.explicit_seed.push_back(e.is_object() && e.contains("seed"));
  }
  if (r.has("battery")) cfg.battery = parse_battery_node(r.at("battery"), "battery");
  if (r.has("grid")) {
    const json& g = r.at("grid");
    if (g.is_string()) {
      cfg.grid = parse_grid(g.get<std::string>());
    } else {
      Reader gr(g, "grid");
      if (gr.has("hi")) cfg.grid.hi = gr.number("hi", 0.1);
      if (gr.has("lo")) cfg.grid.lo = gr.number("lo", 1e-6);
      if (gr.has("count")) cfg.grid.count = static_cast<std::size_t>(gr.integer("count", 26));
      gr.finish();
    }
  }
  cfg.seed = static_cast<std::uint64_t>(r.integer("seed", 1));
  cfg.output = r.string("output", cfg.output);
  if (r.has("perturb")) {
    Reader p(r.at("perturb"), "perturb");
    PerturbSchedule s;
    s.amplitude = p.number("amplitude", s.amplitude);
    s.cap = static_cast<int>(p.integer("cap", s.cap));
    s.rank = static_cast<std::size_t>(p.integer("rank", static_cast<std::int64_t>(s.rank)));
    p.finish();
    cfg.perturb = s;
  }
  if (r.has("spectrum")) {
    Reader s(r.at("spectrum"), "spectrum");
    if (s.has("lambda_min")) cfg.spectrum.lambda_min = s.number("lambda_min", 1.0);
    if (s.has("lambda_max")) cfg.spectrum.lambda_max = s.number("lambda_max", 1.0);
    cfg.spectrum.points = static_cast<std::size_t>(s.integer("points", 41));
    s.finish();
  }
  if (r.has("verify")) cfg.verify = parse_verify(r.at("verify"), "verify", cfg.manifold);
  r.finish();
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::config, "cannot read config " + path);
  }
  return parse_config(text, fs::path(path).extension() == ".json");
}

DistributionSpec parse_distribution_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("invalid JSON: ") + e.what());
  }
  bool explicit_seed = false;
  return parse_distribution(j, "distribution", explicit_seed);
}

SeminormBattery parse_battery(const std::string& text) {
  SeminormBattery b;
  b.sobolev_orders.clear();
  b.sup_orders.clear();
  static const std::regex token(R"(\s*([HC])(-?[0-9]+)(?:-(-?[0-9]+))?\s*)");
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::smatch m;
    if (!std::regex_match(item, m, token)) throw Error(ErrorCode::config, "battery: cannot parse '" + item + "'");
    const int lo = std::stoi(m[2]);
    const int hi = m[3].matched ? std::stoi(m[3]) : lo;
    if (hi < lo) throw Error(ErrorCode::config, "battery: empty range '" + item + "'");
    auto& list = m[1] == "H" ? b.sobolev_orders : b.sup_orders;
    for (int j = lo; j <= hi; ++j) {
      if (std::find(list.begin(), list.end(), j) == list.end()) list.push_back(j);
    }
  }
  std::sort(b.sobolev_orders.begin(), b.sobolev_orders.end());
  std::sort(b.sup_orders.begin(), b.sup_orders.end());
  if (b.sobolev_orders.empty() && b.sup_orders.empty()) throw Error(ErrorCode::config, "battery is empty");
  return b;
}

GridPolicy parse_grid(const std::string& text) {
  static const std::regex re(R"(\s*([^:]+):([^:]+):([0-9]+)\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw Error(ErrorCode::config, "grid: expected hi:lo:count, got '" + text + "'");
  GridPolicy g;
  try {
    g.hi = std::stod(m[1]);
    g.lo = std::stod(m[2]);
    g.count = static_cast<std::size_t>(std::stoul(m[3]));
  } catch (const std::exception&) {
    throw Error(ErrorCode::config, "grid: expected hi:lo:count, got '" + text + "'");
  }
  return g;
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& ov) {
  if (ov.output) cfg.output = *ov.output;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.grid) cfg.grid = parse_grid(*ov.grid);
  if (ov.battery) cfg.battery = parse_battery(*ov.battery);
  validate(cfg);
}

std::string canonical_config(const ExperimentConfig& cfg) { return config_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
  return buf;
}

SymbolNet build_symbol_net(const SymbolConfig& cfg) {
  if (cfg.type == "plateau") return SymbolNet::plain(plateau_symbol(cfg.t, cfg.shape));
  if (cfg.type == "heat") return SymbolNet::plain(heat_symbol());
  if (cfg.type == "taylor") return SymbolNet::plain(taylor_symbol(cfg.order));
  if (cfg.type == "zero") return SymbolNet::plain(zero_symbol());
  if (cfg.type == "admissible") {
    SymbolSequence seq = admissible_from_schedule(cfg.schedule, cfg.shape);
    return cfg.level == 0 ? SymbolNet::limit(seq) : SymbolNet::staged(seq, cfg.level);
  }
  throw Error(ErrorCode::config, "unknown symbol type '" + cfg.type + "'");
}

const std::vector<std::string>& verify_properties() {
  static const std::vector<std::string> names = {"special", "order",   "mult",     "isometry",
                                                 "regularity", "support", "singsupp", "staged"};
  return names;
}

int verdict_exit_code(const VerdictReport& rep, const std::optional<std::string>& expect_fail) {
  const auto failing = failing_groups(rep);
  if (!expect_fail) return failing.empty() ? 0 : 1;
  if (*expect_fail == rep.property) return failing.empty() ? 1 : 0;
  const auto groups = rep.groups();
  if (std::find(groups.begin(), groups.end(), *expect_fail) == groups.end()) {
    throw Error(ErrorCode::config, "expect-fail: property " + rep.property + " has no condition '" + *expect_fail + "'");
  }
  return failing.size() == 1 && failing.front() == *expect_fail ? 0 : 1;
}

std::string verdict_json(const VerdictReport& rep, const std::optional<std::string>& expect_fail) {
  json j;
  j["property"] = rep.property;
  j["manifold"] = rep.manifold;
  j["symbol"] = rep.symbol;
  j["inputs"] = rep.inputs;
  j["pass"] = rep.pass();
  j["groups"] = json::object();
  for (const auto& g : rep.groups()) j["groups"][g] = rep.group_pass(g);
  j["expect_fail"] = expect_fail ? json(*expect_fail) : json(nullptr);
  j["exit_code"] = verdict_exit_code(rep, expect_fail);
  j["conditions"] = json::array();
  for (const auto& c : rep.conditions) {
    json cj;
    cj["id"] = c.id;
    cj["group"] = c.group;
    cj["input"] = c.input;
    cj["pass"] = c.pass;
    cj["verdict"] = c.verdict;
    if (!c.rates.empty()) {
      // Headline slope: the smallest fitted one.
      const auto worst = std::min_element(c.rates.begin(), c.rates.end(), [](const NamedRate& a, const NamedRate& b) {
        return a.rate.order() < b.rate.order();
      });
      cj["slope"] = worst->rate.slope;
      cj["r2"] = worst->rate.r_squared ? json(*worst->rate.r_squared) : json(nullptr);
    }
    if (c.metric) cj["metric"] = *c.metric;
    if (!c.detail.empty()) cj["detail"] = c.detail;
    cj["rates"] = json::array();
    for (const auto& r : c.rates) cj["rates"].push_back(rate_json(r.seminorm, r.rate));
    j["conditions"].push_back(cj);
  }
  j["summary"] = json::object();
  for (const auto& [k, v] : rep.summary) j["summary"][k] = v;
  j["notes"] = rep.notes;
  return j.dump(2) + "\n";
}

int cmd_spectrum(const ExperimentConfig& cfg) {
  Run run(cfg, "spectrum");
  const ManifoldPtr man = make_manifold(cfg.manifold);
  const double lo = cfg.spectrum.lambda_min.value_or(1.0);
  const double hi = cfg.spectrum.lambda_max.value_or(man->kind() == ManifoldKind::torus2 ? 1e4 : 1e6);
  if (!(lo > 0.0 && hi > lo)) throw Error(ErrorCode::config, "spectrum: need 0 < lambda_min < lambda_max");
  const std::size_t n = cfg.spectrum.points;
  std::vector<double> lam(n);
  for (std::size_t i = 0; i < n; ++i) {
    lam[i] = i + 1 == n ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  std::vector<std::int64_t> count(n);
  parallel_for(n, [&](std::size_t i) { count[i] = man->weyl_count(lam[i]); });
  std::ostringstream os;
  os << "lambda,count,asymptotic,ratio\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double a = man->weyl_asymptotic(lam[i]);
    os << format_double(lam[i]) << ',' << count[i] << ',' << format_double(a) << ','
       << format_double(static_cast<double>(count[i]) / a) << '\n';
  }
  run.stage("count");
  run.write("weyl.csv", os.str());
  run.finish();
  return 0;
}

int cmd_embed(const ExperimentConfig& cfg) {
  Run run(cfg, "embed");
  const Context c = make_context(cfg, run);
  std::vector<std::pair<DistributionSpec, bool>> all;
  for (const auto& d : c.dists) all.emplace_back(d, false);
  for (const auto& d : c.smooth) all.emplace_back(d, true);
  if (all.empty()) throw Error(ErrorCode::config, "embed needs at least one distribution");
  for (const auto& [d, smooth] : all) {
    const SpectralCoefficients u = catalog_for_net(c.net, c.man, d, c.grid);
    const CoefficientNet frames = embed_entry(c.net, u, c.grid, c.opts);
    const auto series = battery_series(frames.frames, c.battery);
    std::map<std::string, RateEstimate> table;
    for (const auto& [id, v] : series) table[id] = fit_order(c.grid.samples(), v, c.opts.fit);
    std::string csv = rates_csv_header() + rates_csv(table, "embed");
    if (smooth) csv += rates_csv(defect_rates(frames, u, c.battery, c.opts.fit), "defect");
    run.write("rates_" + d.id + ".csv", csv);
    run.write("values_" + d.id + ".csv", series_csv(c.grid, series));
    run.write("frames_" + d.id + ".csv", frames_csv(frames, kFrameModes));
    run.stage("embed:" + d.id);
  }
  run.finish();
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, const std::string& property, const std::optional<std::string>& expect_fail) {
  const auto& props = verify_properties();
  if (std::find(props.begin(), props.end(), property) == props.end()) {
    throw Error(ErrorCode::config, "unknown property '" + property + "'");
  }
  Run run(cfg, "verify " + property);
  const Context c = make_context(cfg, run);
  VerdictReport rep;
  if (property == "special") {
    rep = check_special_embedding(c.net, c.man, c.dists, c.smooth, c.battery, c.grid, c.opts);
  } else if (property == "order") {
    rep = verify_order(c, cfg);
  } else if (property == "mult") {
    rep = verify_mult(c, cfg);
  } else if (property == "isometry") {
    rep = verify_isometry(c, cfg);
  } else if (property == "regularity") {
    rep = verify_regularity(c);
  } else if (property == "support") {
    rep = verify_support(c, cfg);
  } else if (property == "singsupp") {
    rep = verify_singsupp(c, cfg);
  } else {
    rep = verify_staged(c, cfg);
  }
  run.stage("verify");
  const int code = verdict_exit_code(rep, expect_fail);
  run.write("verdict_" + property + ".json", verdict_json(rep, expect_fail));
  run.finish();
  return code;
}

int cmd_report(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw Error(ErrorCode::config, "report: " + dir + " is not a directory");
  std::vector<fs::path> runs;
  if (fs::exists(root / "manifest.json")) runs.push_back(root);
  std::vector<fs::path> subs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) subs.push_back(e.path());
  }
  std::sort(subs.begin(), subs.end());
  runs.insert(runs.end(), subs.begin(), subs.end());
  if (runs.empty()) throw Error(ErrorCode::config, "report: no runs under " + dir);

  std::ostringstream md;
  json summary;
  summary["runs"] = json::array();
  md << "# Run report\n";
  for (const auto& r : runs) {
    json manifest;
    try {
      manifest = json::parse(read_file(r / "manifest.json"));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::data, "report: bad manifest in " + r.string() + ": " + e.what());
    }
    const std::string name = r == root ? std::string(".") : fs::relative(r, root).string();
    json entry;
    entry["run"] = name;
    entry["config_hash"] = manifest.value("config_hash", "");
    entry["version"] = manifest.value("version", "");
    const json& config = manifest.contains("config") ? manifest["config"] : json::object();
    entry["manifold"] = config.value("manifold", "");
    entry["symbol"] = config.contains("symbol") ? config["symbol"].value("type", "") : "";
    md << "\n## " << name << "\n\n";
    md << "- config hash: `" << entry["config_hash"].get<std::string>() << "`\n";
    md << "- manifold: " << entry["manifold"].get<std::string>() << "\n";
    md << "- symbol: " << entry["symbol"].get<std::string>() << "\n";
    if (manifest.contains("commands")) {
      md << "- commands:";
      for (const auto& [cmd, info] : manifest["commands"].items()) md << " `" << cmd << "`";
      md << "\n";
    }
    std::vector<fs::path> verdicts;
    for (const auto& e : fs::directory_iterator(r)) {
      const std::string fn = e.path().filename().string();
      if (e.is_regular_file() && fn.rfind("verdict_", 0) == 0 && e.path().extension() == ".json") verdicts.push_back(e.path());
    }
    std::sort(verdicts.begin(), verdicts.end());
    entry["verdicts"] = json::array();
    for (const auto& v : verdicts) {
      json vj;
      try {
        vj = json::parse(read_file(v));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::data, "report: bad verdict " + v.string() + ": " + e.what());
      }
      const bool pass = vj.value("pass", false);
      const int code = vj.value("exit_code", 1);
      md << "\n### " << vj.value("property", "?") << ": " << (pass ? "pass" : "fail");
      if (!vj["expect_fail"].is_null()) md << " (expected failure of " << vj["expect_fail"].get<std::string>() << ", exit " << code << ")";
      md << "\n\n| condition | verdict | slope | pass |\n|---|---|---|---|\n";
      for (const auto& c : vj["conditions"]) {
        md << "| " << c.value("id", "") << " | " << c.value("verdict", "") << " | "
           << (c.contains("slope") ? format_double(c["slope"].get<double>()) : std::string("")) << " | "
           << (c.value("pass", false) ? "yes" : "no") << " |\n";
      }
      if (vj.contains("summary") && !vj["summary"].empty()) {
        md << "\n";
        for (const auto& [k, val] : vj["summary"].items()) md << "- " << k << ": " << val.get<std::string>() << "\n";
      }
      if (vj.contains("notes")) {
        for (const auto& n : vj["notes"]) md << "- note: " << n.get<std::string>() << "\n";
      }
      entry["verdicts"].push_back({{"property", vj.value("property", "")}, {"pass", pass}, {"exit_code", code}});
    }
    summary["runs"].push_back(entry);
  }
  write_file(root / "report.md", md.str());
  write_file(root / "report.json", summary.dump(2) + "\n");
  return 0;
}

}  // namespace spemb
