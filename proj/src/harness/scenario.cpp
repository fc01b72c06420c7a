#include "pcs/harness/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "pcs/error.hpp"

namespace pcs::harness {
namespace {

std::string where(const YAML::Node& node) {
  if (node.Mark().is_null()) return "";
  return " (line " + std::to_string(node.Mark().line + 1) + ")";
}

[[noreturn]] void parse_fail(const std::string& field, const YAML::Node& node,
                             const std::string& what) {
  throw Error(ErrorCode::kParseError, field + where(node) + ": " + what);
}

[[noreturn]] void invalid(const std::string& field, const YAML::Node& node,
                          const std::string& what) {
  throw Error(ErrorCode::kValidationError, field + where(node) + ": " + what);
}

void expect_keys(const YAML::Node& map, const std::string& field,
                 std::initializer_list<const char*> allowed) {
  if (!map.IsMap()) parse_fail(field, map, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      invalid(field.empty() ? key : field + "." + key, kv.first, "unknown key");
    }
  }
}

std::string join(const std::string& parent, const char* key) {
  return parent.empty() ? key : parent + "." + key;
}

double to_double(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) parse_fail(field, node, "expected a number");
  const std::string& s = node.Scalar();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    parse_fail(field, node, "'" + s + "' is not a number");
  }
  return v;
}

std::uint64_t to_uint(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) parse_fail(field, node, "expected a non-negative integer");
  const std::string& s = node.Scalar();
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    parse_fail(field, node, "'" + s + "' is not a non-negative integer");
  }
  return v;
}

std::string to_str(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) parse_fail(field, node, "expected a string");
  return node.Scalar();
}

// Optional scalar readers: leave `out` at its default when the key is absent.
void read(const YAML::Node& map, const std::string& parent, const char* key, double& out) {
  if (const auto n = map[key]) out = to_double(n, join(parent, key));
}
void read(const YAML::Node& map, const std::string& parent, const char* key, std::size_t& out) {
  if (const auto n = map[key]) out = static_cast<std::size_t>(to_uint(n, join(parent, key)));
}
void read(const YAML::Node& map, const std::string& parent, const char* key, std::string& out) {
  if (const auto n = map[key]) out = to_str(n, join(parent, key));
}

template <typename T, typename F>
std::vector<T> read_list(const YAML::Node& node, const std::string& field, F convert) {
  if (!node.IsSequence()) parse_fail(field, node, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(convert(node[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ContentionVector read_vector(const YAML::Node& node, const std::string& field) {
  expect_keys(node, field, {"core_usage", "cache_mpki", "disk_bw", "network_bw"});
  ContentionVector v;
  read(node, field, "core_usage", v.core_usage);
  read(node, field, "cache_mpki", v.cache_mpki);
  read(node, field, "disk_bw", v.disk_bw);
  read(node, field, "network_bw", v.network_bw);
  return v;
}

sim::WorkloadClass read_class(const YAML::Node& node, const std::string& field) {
  expect_keys(node, field,
              {"name", "rate", "min_duration", "max_duration", "footprint_at_full", "sampling",
               "size_table"});
  sim::WorkloadClass cls;
  if (!node["name"]) invalid(join(field, "name"), node, "is required");
  read(node, field, "name", cls.name);
  read(node, field, "rate", cls.rate);
  read(node, field, "min_duration", cls.min_duration);
  read(node, field, "max_duration", cls.max_duration);
  if (const auto n = node["footprint_at_full"]) {
    cls.footprint_at_full = read_vector(n, join(field, "footprint_at_full"));
  }
  if (const auto n = node["sampling"]) {
    const auto s = to_str(n, join(field, "sampling"));
    if (s == "table") {
      cls.sampling = sim::SizeSampling::kTable;
    } else if (s == "log_uniform") {
      cls.sampling = sim::SizeSampling::kLogUniform;
    } else {
      invalid(join(field, "sampling"), n, "expected table or log_uniform, got '" + s + "'");
    }
  }
  if (const auto n = node["size_table"]) {
    cls.size_table = read_list<sim::SizePoint>(
        n, join(field, "size_table"), [](const YAML::Node& p, const std::string& f) {
          expect_keys(p, f, {"size_gb", "intensity"});
          sim::SizePoint sp;
          read(p, f, "size_gb", sp.size_gb);
          read(p, f, "intensity", sp.intensity);
          return sp;
        });
  }
  return cls;
}

void parse_topology(const YAML::Node& node, TopologySpec& t) {
  const std::string f = "topology";
  expect_keys(node, f, {"stages", "nodes", "placement", "node_speed"});
  if (!node["stages"]) invalid("topology.stages", node, "is required");
  if (!node["nodes"]) invalid("topology.nodes", node, "is required");
  t.stage_sizes = read_list<std::size_t>(node["stages"], "topology.stages",
                                         [](const YAML::Node& n, const std::string& fl) {
                                           return static_cast<std::size_t>(to_uint(n, fl));
                                         });
  read(node, f, "nodes", t.nodes);
  if (const auto p = node["placement"]) {
    if (p.IsScalar()) {
      const auto s = p.Scalar();
      if (s != "round_robin") {
        invalid("topology.placement", p, "expected round_robin or a list of node ids");
      }
      t.placement_kind = PlacementKind::kRoundRobin;
    } else {
      t.placement_kind = PlacementKind::kExplicit;
      t.placement = read_list<NodeId>(p, "topology.placement",
                                      [](const YAML::Node& n, const std::string& fl) {
                                        return static_cast<NodeId>(to_uint(n, fl));
                                      });
    }
  }
  if (const auto s = node["node_speed"]) {
    t.node_speed = read_list<double>(s, "topology.node_speed", to_double);
  }
}

void parse_truth(const YAML::Node& node, sim::GroundTruth& g) {
  const std::string f = "ground_truth";
  expect_keys(node, f, {"base_service_time", "slope", "nonlinear_core", "distribution", "scv"});
  read(node, f, "base_service_time", g.base_service_time);
  if (const auto s = node["slope"]) g.slope = read_vector(s, "ground_truth.slope");
  read(node, f, "nonlinear_core", g.nonlinear_core);
  if (const auto d = node["distribution"]) {
    try {
      g.distribution = sim::parse_distribution(to_str(d, "ground_truth.distribution"));
    } catch (const Error& e) {
      invalid("ground_truth.distribution", d, e.detail());
    }
  }
  read(node, f, "scv", g.scv);
}

void parse_job_mix(const YAML::Node& node, sim::JobMix& mix) {
  if (node.IsScalar()) {
    if (node.Scalar() == "default") return;
    if (node.Scalar() == "none") {
      mix.classes.clear();
      return;
    }
    invalid("job_mix", node, "expected default, none or a mapping");
  }
  expect_keys(node, "job_mix", {"classes", "node_rate_scale"});
  if (const auto c = node["classes"]) {
    mix.classes = read_list<sim::WorkloadClass>(c, "job_mix.classes", read_class);
  }
  if (const auto s = node["node_rate_scale"]) {
    mix.node_rate_scale = read_list<double>(s, "job_mix.node_rate_scale", to_double);
  }
}

void parse_prediction(const YAML::Node& node, PredictionErrorSpec& p) {
  const std::string f = "prediction_error";
  expect_keys(node, f,
              {"training_rate", "training_segment", "evaluation_rate", "evaluation_duration",
               "levels"});
  read(node, f, "training_rate", p.training_rate);
  read(node, f, "training_segment", p.training_segment);
  read(node, f, "evaluation_rate", p.evaluation_rate);
  read(node, f, "evaluation_duration", p.evaluation_duration);
  if (const auto l = node["levels"]) {
    p.levels = read_list<EvaluationClass>(
        l, "prediction_error.levels", [](const YAML::Node& n, const std::string& fl) {
          expect_keys(n, fl, {"class", "sizes", "min_gb", "max_gb"});
          EvaluationClass e;
          read(n, fl, "class", e.workload_class);
          read(n, fl, "sizes", e.sizes);
          read(n, fl, "min_gb", e.min_gb);
          read(n, fl, "max_gb", e.max_gb);
          return e;
        });
  }
}

// Line numbers for semantic checks made after parsing.
struct Marks {
  YAML::Node root;
  YAML::Node at(std::initializer_list<const char*> path) const {
    YAML::Node n = root;
    YAML::Node last = root;
    for (const char* key : path) {
      if (!n.IsMap() || !n[key]) return last;
      n = n[key];
      last = n;
    }
    return last;
  }
};

void check(bool ok, const std::string& field, const Marks& marks,
           std::initializer_list<const char*> path, const std::string& what) {
  if (!ok) invalid(field, marks.at(path), what);
}

void validate_impl(const ScenarioConfig& c, const Marks& m) {
  const auto& t = c.topology;
  check(!t.stage_sizes.empty(), "topology.stages", m, {"topology", "stages"},
        "at least one stage is required");
  std::size_t components = 0;
  for (std::size_t s : t.stage_sizes) {
    check(s > 0, "topology.stages", m, {"topology", "stages"}, "every stage needs a component");
    components += s;
  }
  check(t.nodes > 0, "topology.nodes", m, {"topology", "nodes"}, "must be positive");
  if (t.placement_kind == PlacementKind::kExplicit) {
    check(t.placement.size() == components, "topology.placement", m, {"topology", "placement"},
          "has " + std::to_string(t.placement.size()) + " entries for " +
              std::to_string(components) + " components");
    for (NodeId n : t.placement) {
      check(n < t.nodes, "topology.placement", m, {"topology", "placement"},
            "node " + std::to_string(n) + " does not exist");
    }
  }
  if (!t.node_speed.empty()) {
    check(t.node_speed.size() == t.nodes, "topology.node_speed", m, {"topology", "node_speed"},
          "needs one entry per node");
    for (double s : t.node_speed) {
      check(std::isfinite(s) && s > 0.0, "topology.node_speed", m, {"topology", "node_speed"},
            "speeds must be positive");
    }
  }
  check(c.component_footprint.valid(), "component_footprint", m, {"component_footprint"},
        "fields must be finite and non-negative");

  const auto& g = c.truth;
  check(std::isfinite(g.base_service_time) && g.base_service_time > 0.0,
        "ground_truth.base_service_time", m, {"ground_truth", "base_service_time"},
        "must be positive");
  check(g.slope.valid(), "ground_truth.slope", m, {"ground_truth", "slope"},
        "fields must be finite and non-negative");
  check(std::isfinite(g.nonlinear_core) && g.nonlinear_core >= 0.0, "ground_truth.nonlinear_core",
        m, {"ground_truth", "nonlinear_core"}, "must be non-negative");
  check(std::isfinite(g.scv) && g.scv >= 0.0, "ground_truth.scv", m, {"ground_truth", "scv"},
        "must be non-negative");

  std::set<std::string> class_names;
  for (const auto& cls : c.job_mix.classes) {
    check(class_names.insert(cls.name).second, "job_mix.classes", m, {"job_mix", "classes"},
          "duplicate class '" + cls.name + "'");
    check(std::isfinite(cls.rate) && cls.rate >= 0.0, "job_mix.classes", m,
          {"job_mix", "classes"}, "class '" + cls.name + "' needs a non-negative rate");
    check(cls.min_duration > 0.0 && cls.max_duration >= cls.min_duration, "job_mix.classes", m,
          {"job_mix", "classes"}, "class '" + cls.name + "' has an empty duration range");
    check(!cls.size_table.empty(), "job_mix.classes", m, {"job_mix", "classes"},
          "class '" + cls.name + "' needs a size_table");
  }
  if (!c.job_mix.node_rate_scale.empty()) {
    check(c.job_mix.node_rate_scale.size() == t.nodes, "job_mix.node_rate_scale", m,
          {"job_mix", "node_rate_scale"}, "needs one entry per node");
  }

  check(!c.arrival_rates.empty(), "arrival_rates", m, {"arrival_rates"},
        "at least one arrival rate is required");
  for (double r : c.arrival_rates) {
    check(std::isfinite(r) && r > 0.0, "arrival_rates", m, {"arrival_rates"},
          "rates must be positive");
  }
  check(!c.policies.empty(), "policies", m, {"policies"}, "at least one policy is required");
  for (const auto& p : c.policies) {
    try {
      (void)sim::parse_policy(p);
    } catch (const Error& e) {
      invalid("policies", m.at({"policies"}), e.detail());
    }
  }
  check(!c.seeds.empty(), "seeds", m, {"seeds"}, "at least one seed is required");
  check(std::isfinite(c.horizon) && c.horizon > 0.0, "horizon", m, {"horizon"},
        "must be positive");
  check(std::isfinite(c.warmup) && c.warmup >= 0.0 && c.warmup < c.horizon, "warmup", m,
        {"warmup"}, "must lie in [0, horizon)");
  check(std::isfinite(c.scheduler.epsilon) && c.scheduler.epsilon >= 0.0, "scheduler.epsilon", m,
        {"scheduler", "epsilon"}, "must be non-negative");
  check(std::isfinite(c.schedule_interval) && c.schedule_interval > 0.0, "scheduler.interval", m,
        {"scheduler", "interval"}, "must be positive");
  check(std::isfinite(c.migration.per_migration_delay) && c.migration.per_migration_delay >= 0.0,
        "migration.delay", m, {"migration", "delay"}, "must be non-negative");
  const auto& mon = c.monitor;
  check(std::isfinite(mon.noise) && mon.noise >= 0.0, "monitor.noise", m, {"monitor", "noise"},
        "must be non-negative");
  check(mon.system_period > 0.0 && mon.micro_period > 0.0 && mon.rate_window > 0.0 &&
            mon.training_window > 0.0,
        "monitor", m, {"monitor"}, "periods and windows must be positive");
  check(mon.schedule_samples > 0, "monitor.schedule_samples", m, {"monitor", "schedule_samples"},
        "must be positive");
  check(std::isfinite(c.cancel_delay) && c.cancel_delay >= 0.0, "cancel_delay", m,
        {"cancel_delay"}, "must be non-negative");
  check(c.queue_bound > 0, "queue_bound", m, {"queue_bound"}, "must be positive");
  check(c.reissue_window > 0, "reissue_window", m, {"reissue_window"}, "must be positive");
  check(std::isfinite(c.reissue_prior) && c.reissue_prior > 0.0, "reissue_prior", m,
        {"reissue_prior"}, "must be positive");

  const auto& p = c.prediction;
  check(p.training_rate > 0.0 && std::isfinite(p.training_segment) &&
            p.training_segment >= 1.0 && p.evaluation_rate > 0.0 && p.evaluation_duration > 0.0,
        "prediction_error", m, {"prediction_error"}, "rates and durations must be positive");
  for (const auto& l : p.levels) {
    check(class_names.count(l.workload_class) == 1, "prediction_error.levels", m,
          {"prediction_error", "levels"}, "unknown workload class '" + l.workload_class + "'");
    check(l.sizes > 0 && l.min_gb > 0.0 && l.max_gb >= l.min_gb, "prediction_error.levels", m,
          {"prediction_error", "levels"}, "needs sizes > 0 and 0 < min_gb <= max_gb");
  }
}

std::string num(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

void emit_vector(YAML::Emitter& out, const ContentionVector& v) {
  out << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "core_usage" << YAML::Value << num(v.core_usage);
  out << YAML::Key << "cache_mpki" << YAML::Value << num(v.cache_mpki);
  out << YAML::Key << "disk_bw" << YAML::Value << num(v.disk_bw);
  out << YAML::Key << "network_bw" << YAML::Value << num(v.network_bw);
  out << YAML::EndMap;
}

template <typename T, typename F>
void emit_list(YAML::Emitter& out, const std::vector<T>& values, F fmt) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& v : values) out << fmt(v);
  out << YAML::EndSeq;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::kParseError,
                source + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) {
    throw Error(ErrorCode::kParseError, source + ": expected a mapping at the top level");
  }

  ScenarioConfig c;
  c.job_mix = sim::default_job_mix();
  try {
    expect_keys(root, "",
                {"name", "topology", "component_footprint", "ground_truth", "job_mix",
                 "arrival_rates", "policies", "seeds", "horizon", "warmup", "max_requests",
                 "scheduler", "migration", "monitor", "cancel_delay", "queue_bound",
                 "reissue_window", "reissue_prior", "output_dir", "prediction_error"});
    read(root, "", "name", c.name);
    if (!root["topology"]) invalid("topology", root, "is required");
    parse_topology(root["topology"], c.topology);
    if (const auto n = root["component_footprint"]) {
      c.component_footprint = read_vector(n, "component_footprint");
    }
    if (const auto n = root["ground_truth"]) parse_truth(n, c.truth);
    if (const auto n = root["job_mix"]) parse_job_mix(n, c.job_mix);
    if (!root["arrival_rates"]) invalid("arrival_rates", root, "is required");
    c.arrival_rates = read_list<double>(root["arrival_rates"], "arrival_rates", to_double);
    if (const auto n = root["policies"]) {
      c.policies = read_list<std::string>(n, "policies", to_str);
    } else {
      c.policies = {"basic", "red-3", "red-5", "ri-90", "ri-99", "pcs"};
    }
    if (const auto n = root["seeds"]) {
      c.seeds = read_list<std::uint64_t>(n, "seeds", to_uint);
    } else {
      c.seeds = {1};
    }
    read(root, "", "horizon", c.horizon);
    read(root, "", "warmup", c.warmup);
    if (const auto n = root["max_requests"]) c.max_requests = to_uint(n, "max_requests");
    if (const auto s = root["scheduler"]) {
      expect_keys(s, "scheduler", {"epsilon", "interval", "max_iterations"});
      read(s, "scheduler", "epsilon", c.scheduler.epsilon);
      read(s, "scheduler", "interval", c.schedule_interval);
      if (const auto n = s["max_iterations"]) {
        c.scheduler.max_iterations = static_cast<std::size_t>(to_uint(n, "scheduler.max_iterations"));
      }
    }
    if (const auto s = root["migration"]) {
      expect_keys(s, "migration", {"delay"});
      read(s, "migration", "delay", c.migration.per_migration_delay);
    }
    if (const auto s = root["monitor"]) {
      expect_keys(s, "monitor",
                  {"noise", "system_period", "micro_period", "rate_window", "training_window",
                   "schedule_samples"});
      read(s, "monitor", "noise", c.monitor.noise);
      read(s, "monitor", "system_period", c.monitor.system_period);
      read(s, "monitor", "micro_period", c.monitor.micro_period);
      read(s, "monitor", "rate_window", c.monitor.rate_window);
      read(s, "monitor", "training_window", c.monitor.training_window);
      read(s, "monitor", "schedule_samples", c.monitor.schedule_samples);
    }
    read(root, "", "cancel_delay", c.cancel_delay);
    read(root, "", "queue_bound", c.queue_bound);
    read(root, "", "reissue_window", c.reissue_window);
    read(root, "", "reissue_prior", c.reissue_prior);
    read(root, "", "output_dir", c.output_dir);
    // Default held-out levels: 20 sizes of the CPU-bound class and 10 of the
    // mixed one, where the job mix defines them.
    for (const auto& cls : c.job_mix.classes) {
      if (cls.name == "cpu_heavy") c.prediction.levels.push_back({cls.name, 20, 0.05, 4.0});
    }
    for (const auto& cls : c.job_mix.classes) {
      if (cls.name == "mixed") c.prediction.levels.push_back({cls.name, 10, 0.2, 7.0});
    }
    if (const auto n = root["prediction_error"]) parse_prediction(n, c.prediction);
    validate_impl(c, Marks{root});
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParseError,
                source + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.detail());
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string());
}

void validate_scenario(const ScenarioConfig& config) { validate_impl(config, Marks{}); }

std::string serialize_scenario(const ScenarioConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;

  out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "stages" << YAML::Value;
  emit_list(out, c.topology.stage_sizes, [](std::size_t v) { return std::to_string(v); });
  out << YAML::Key << "nodes" << YAML::Value << std::to_string(c.topology.nodes);
  out << YAML::Key << "placement" << YAML::Value;
  if (c.topology.placement_kind == PlacementKind::kRoundRobin) {
    out << "round_robin";
  } else {
    emit_list(out, c.topology.placement, [](NodeId v) { return std::to_string(v); });
  }
  if (!c.topology.node_speed.empty()) {
    out << YAML::Key << "node_speed" << YAML::Value;
    emit_list(out, c.topology.node_speed, num);
  }
  out << YAML::EndMap;

  out << YAML::Key << "component_footprint" << YAML::Value;
  emit_vector(out, c.component_footprint);

  out << YAML::Key << "ground_truth" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "base_service_time" << YAML::Value << num(c.truth.base_service_time);
  out << YAML::Key << "slope" << YAML::Value;
  emit_vector(out, c.truth.slope);
  out << YAML::Key << "nonlinear_core" << YAML::Value << num(c.truth.nonlinear_core);
  out << YAML::Key << "distribution" << YAML::Value
      << std::string(sim::to_string(c.truth.distribution));
  out << YAML::Key << "scv" << YAML::Value << num(c.truth.scv);
  out << YAML::EndMap;

  out << YAML::Key << "job_mix" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "classes" << YAML::Value << YAML::BeginSeq;
  for (const auto& cls : c.job_mix.classes) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << cls.name;
    out << YAML::Key << "rate" << YAML::Value << num(cls.rate);
    out << YAML::Key << "min_duration" << YAML::Value << num(cls.min_duration);
    out << YAML::Key << "max_duration" << YAML::Value << num(cls.max_duration);
    out << YAML::Key << "footprint_at_full" << YAML::Value;
    emit_vector(out, cls.footprint_at_full);
    out << YAML::Key << "sampling" << YAML::Value
        << (cls.sampling == sim::SizeSampling::kTable ? "table" : "log_uniform");
    out << YAML::Key << "size_table" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : cls.size_table) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "size_gb" << YAML::Value << num(p.size_gb);
      out << YAML::Key << "intensity" << YAML::Value << num(p.intensity);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  if (!c.job_mix.node_rate_scale.empty()) {
    out << YAML::Key << "node_rate_scale" << YAML::Value;
    emit_list(out, c.job_mix.node_rate_scale, num);
  }
  out << YAML::EndMap;

  out << YAML::Key << "arrival_rates" << YAML::Value;
  emit_list(out, c.arrival_rates, num);
  out << YAML::Key << "policies" << YAML::Value;
  emit_list(out, c.policies, [](const std::string& s) { return s; });
  out << YAML::Key << "seeds" << YAML::Value;
  emit_list(out, c.seeds, [](std::uint64_t v) { return std::to_string(v); });
  out << YAML::Key << "horizon" << YAML::Value << num(c.horizon);
  out << YAML::Key << "warmup" << YAML::Value << num(c.warmup);
  out << YAML::Key << "max_requests" << YAML::Value << std::to_string(c.max_requests);

  out << YAML::Key << "scheduler" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilon" << YAML::Value << num(c.scheduler.epsilon);
  out << YAML::Key << "interval" << YAML::Value << num(c.schedule_interval);
  if (c.scheduler.max_iterations) {
    out << YAML::Key << "max_iterations" << YAML::Value
        << std::to_string(*c.scheduler.max_iterations);
  }
  out << YAML::EndMap;

  out << YAML::Key << "migration" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "delay" << YAML::Value << num(c.migration.per_migration_delay);
  out << YAML::EndMap;

  out << YAML::Key << "monitor" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "noise" << YAML::Value << num(c.monitor.noise);
  out << YAML::Key << "system_period" << YAML::Value << num(c.monitor.system_period);
  out << YAML::Key << "micro_period" << YAML::Value << num(c.monitor.micro_period);
  out << YAML::Key << "rate_window" << YAML::Value << num(c.monitor.rate_window);
  out << YAML::Key << "training_window" << YAML::Value << num(c.monitor.training_window);
  out << YAML::Key << "schedule_samples" << YAML::Value
      << std::to_string(c.monitor.schedule_samples);
  out << YAML::EndMap;

  out << YAML::Key << "cancel_delay" << YAML::Value << num(c.cancel_delay);
  out << YAML::Key << "queue_bound" << YAML::Value << std::to_string(c.queue_bound);
  out << YAML::Key << "reissue_window" << YAML::Value << std::to_string(c.reissue_window);
  out << YAML::Key << "reissue_prior" << YAML::Value << num(c.reissue_prior);
  if (!c.output_dir.empty()) out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;

  const auto& p = c.prediction;
  out << YAML::Key << "prediction_error" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "training_rate" << YAML::Value << num(p.training_rate);
  out << YAML::Key << "training_segment" << YAML::Value << num(p.training_segment);
  out << YAML::Key << "evaluation_rate" << YAML::Value << num(p.evaluation_rate);
  out << YAML::Key << "evaluation_duration" << YAML::Value << num(p.evaluation_duration);
  out << YAML::Key << "levels" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : p.levels) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "class" << YAML::Value << l.workload_class;
    out << YAML::Key << "sizes" << YAML::Value << std::to_string(l.sizes);
    out << YAML::Key << "min_gb" << YAML::Value << num(l.min_gb);
    out << YAML::Key << "max_gb" << YAML::Value << num(l.max_gb);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::vector<ComponentId>> stage_components(const TopologySpec& topology) {
  std::vector<std::vector<ComponentId>> stages;
  ComponentId next = 0;
  for (std::size_t size : topology.stage_sizes) {
    auto& s = stages.emplace_back();
    for (std::size_t i = 0; i < size; ++i) s.push_back(next++);
  }
  return stages;
}

std::vector<NodeId> initial_placement(const TopologySpec& topology) {
  if (topology.placement_kind == PlacementKind::kExplicit) return topology.placement;
  std::size_t m = 0;
  for (std::size_t s : topology.stage_sizes) m += s;
  std::vector<NodeId> placement(m);
  for (std::size_t c = 0; c < m; ++c) placement[c] = c % topology.nodes;
  return placement;
}

sim::PolicySpec resolve_policy(const ScenarioConfig& config, const std::string& policy) {
  sim::PolicySpec resolved = sim::parse_policy(policy);
  if (auto* p = std::get_if<sim::PcsPolicy>(&resolved)) {
    p->scheduler = config.scheduler;
    p->interval = config.schedule_interval;
  } else if (auto* r = std::get_if<sim::ReissuePolicy>(&resolved)) {
    r->prior = config.reissue_prior;
  }
  return resolved;
}

sim::SimulationConfig make_simulation(const ScenarioConfig& config, const std::string& policy,
                                      double arrival_rate, std::uint64_t seed) {
  sim::SimulationConfig s;
  s.stages = stage_components(config.topology);
  s.placement = initial_placement(config.topology);
  s.node_count = config.topology.nodes;
  s.node_speed = config.topology.node_speed;
  s.component_footprint.assign(s.placement.size(), config.component_footprint);
  s.truth = config.truth;
  if (!config.job_mix.classes.empty()) {
    s.interference =
        sim::generate_interference_trace(s.node_count, config.job_mix, config.horizon, seed);
  }
  s.policy = resolve_policy(config, policy);
  s.arrivals = {{0.0, arrival_rate}};
  s.horizon = config.horizon;
  s.max_requests = config.max_requests;
  s.warmup = config.warmup;
  s.seed = seed;
  s.monitor = config.monitor;
  s.migration = config.migration;
  s.cancel_delay = config.cancel_delay;
  s.queue_bound = config.queue_bound;
  s.reissue_window = config.reissue_window;
  return s;
}

}  // namespace pcs::harness
