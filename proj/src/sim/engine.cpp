#include "pcs/sim/engine.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <random>

#include <json.hpp>

#include "pcs/error.hpp"
#include "pcs/model.hpp"

namespace pcs::sim {

std::string_view to_string(ServiceDistribution d) {
  switch (d) {
    case ServiceDistribution::kExponential: return "exponential";
    case ServiceDistribution::kLognormal: return "lognormal";
    case ServiceDistribution::kDeterministic: return "deterministic";
  }
  return "?";
}

ServiceDistribution parse_distribution(std::string_view name) {
  if (name == "exponential") return ServiceDistribution::kExponential;
  if (name == "lognormal") return ServiceDistribution::kLognormal;
  if (name == "deterministic") return ServiceDistribution::kDeterministic;
  throw Error(ErrorCode::kBadConfig, "unknown service distribution '" + std::string(name) + "'");
}

double GroundTruth::mean_service_time(const ContentionVector& co_runners, double speed) const {
  const ContentionVector u = co_runners.clamped();
  double x = base_service_time;
  for (Resource r : kResources) x += slope[r] * u[r];
  x += nonlinear_core * u.core_usage * u.core_usage;
  return speed * x;
}

std::string policy_name(const PolicySpec& policy) {
  struct Visitor {
    std::string operator()(const BasicPolicy&) const { return "basic"; }
    std::string operator()(const RedundancyPolicy& p) const {
      return "red-" + std::to_string(p.replicas);
    }
    std::string operator()(const ReissuePolicy& p) const {
      char buf[32];
      const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p.percentile);
      return "ri-" + std::string(buf, end);
    }
    std::string operator()(const PcsPolicy&) const { return "pcs"; }
  };
  return std::visit(Visitor{}, policy);
}

PolicySpec parse_policy(std::string_view name) {
  auto number = [&](std::string_view digits) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || end != digits.data() + digits.size() || digits.empty()) {
      throw Error(ErrorCode::kBadConfig, "bad policy '" + std::string(name) + "'");
    }
    return v;
  };
  if (name == "basic") return BasicPolicy{};
  if (name == "pcs") return PcsPolicy{};
  if (name.starts_with("red-")) {
    const double k = number(name.substr(4));
    if (k < 1 || k > 8 || k != std::floor(k)) {
      throw Error(ErrorCode::kBadConfig, "redundancy needs 1..8 replicas: '" + std::string(name) + "'");
    }
    return RedundancyPolicy{static_cast<std::size_t>(k)};
  }
  if (name.starts_with("ri-")) {
    const double p = number(name.substr(3));
    if (!(p > 0.0 && p <= 100.0)) {
      throw Error(ErrorCode::kBadConfig,
                  "reissue percentile must be in (0, 100]: '" + std::string(name) + "'");
    }
    ReissuePolicy r;
    r.percentile = p;
    return r;
  }
  throw Error(ErrorCode::kBadConfig, "unknown policy '" + std::string(name) + "'");
}

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr std::size_t kMaxReplicas = 8;
constexpr std::size_t kPercentileRefresh = 100;

std::int64_t to_ns(double s) { return static_cast<std::int64_t>(std::llround(s * 1e9)); }
double to_s(std::int64_t ns) { return static_cast<double>(ns) * 1e-9; }

enum class EventType : std::uint8_t {
  kArrival,
  kServiceEnd,
  kCancel,
  kReissue,
  kMonitor,
  kSchedule,
  kMigrationStart,
  kMigrationEnd,
  kJobStart,
  kJobEnd,
};

struct Event {
  std::int64_t time;
  std::uint64_t seq;
  EventType type;
  std::uint32_t a;
  std::uint32_t b;
};

struct Later {
  bool operator()(const Event& x, const Event& y) const {
    return x.time != y.time ? x.time > y.time : x.seq > y.seq;
  }
};

enum class ReplicaState : std::uint8_t { kFree, kQueued, kRunning, kDone, kCancelled };

struct Replica {
  std::uint32_t subtask = kNone;
  std::uint32_t gen = 0;
  ComponentId server = 0;
  NodeId node = 0;
  std::int64_t dispatch = 0;
  std::int64_t start = -1;
  bool is_replica = false;
  ReplicaState state = ReplicaState::kFree;
};

struct Subtask {
  std::uint32_t request = kNone;
  std::uint64_t request_id = 0;  // stable; the request slot may be reused before late copies finish
  std::uint32_t gen = 0;
  std::uint32_t stage = 0;
  std::uint32_t position = 0;  // index of the logical component within its stage
  ComponentId logical = 0;
  std::int64_t dispatch = 0;
  std::uint32_t outstanding = 0;
  std::array<std::uint32_t, kMaxReplicas + 1> replicas{};
  std::uint8_t replica_count = 0;
  bool done = false;
  bool reissued = false;
  bool live = false;
};

struct Request {
  std::uint64_t id = 0;
  std::int64_t arrival = 0;
  std::uint32_t stage = 0;
  std::uint32_t pending = 0;
  bool measured = false;
};

struct Server {
  std::deque<std::uint32_t> queue;
  bool busy = false;
  bool migrating = false;
  std::uint32_t current = kNone;
  NodeId node = 0;
  std::int64_t busy_ns = 0;
  double obs_sum = 0.0;
  std::uint32_t obs_count = 0;
};

struct NodeSample {
  ContentionVector aggregate;
  ContentionVector batch_estimate;
};

struct Node {
  std::vector<std::uint32_t> active_jobs;  // ascending job index
  ContentionVector batch;
  std::vector<ComponentId> residents;  // ascending
  double held_cache = 0.0;
  std::deque<NodeSample> history;
  // Time integral of batch + hosted contention since the last monitor tick,
  // so readings are period averages rather than instants.
  ContentionVector area;
  std::int64_t accrued_to = 0;
};

// Running nearest-rank percentile over a sliding window, refreshed every
// kPercentileRefresh additions.
class PercentileTracker {
 public:
  PercentileTracker(double p, std::size_t window, double prior)
      : p_(p), window_(window), prior_(prior) {}

  void add(double v) {
    if (ring_.size() < window_) {
      ring_.push_back(v);
    } else {
      ring_[next_] = v;
    }
    next_ = (next_ + 1) % window_;
    if (++since_ >= kPercentileRefresh) {
      since_ = 0;
      scratch_ = ring_;
      const auto n = scratch_.size();
      auto rank = static_cast<std::size_t>(std::ceil(p_ / 100.0 * static_cast<double>(n)));
      rank = std::clamp<std::size_t>(rank, 1, n);
      std::nth_element(scratch_.begin(), scratch_.begin() + (rank - 1), scratch_.end());
      cached_ = scratch_[rank - 1];
      warm_ = true;
    }
  }

  double value() const { return warm_ ? cached_ : prior_; }

 private:
  double p_;
  std::size_t window_;
  double prior_;
  std::vector<double> ring_;
  std::vector<double> scratch_;
  std::size_t next_ = 0;
  std::size_t since_ = 0;
  double cached_ = 0.0;
  bool warm_ = false;
};

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  const std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(id), 0x9e3779b9u};
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

void validate(const SimulationConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kBadConfig, what); };
  if (c.node_count == 0) bad("node_count must be > 0");
  try {
    ServiceTopology topo(c.stages, c.placement);
  } catch (const Error& e) {
    bad(std::string("topology: ") + e.what());
  }
  for (NodeId n : c.placement) {
    if (n >= c.node_count) bad("placement names node " + std::to_string(n) + " beyond node_count");
  }
  if (c.component_footprint.size() != c.placement.size()) {
    bad("component_footprint needs one entry per component");
  }
  for (const auto& f : c.component_footprint) {
    if (!f.valid()) bad("component footprints must be finite and non-negative");
  }
  if (!c.node_speed.empty() && c.node_speed.size() != c.node_count) {
    bad("node_speed needs one entry per node");
  }
  for (double s : c.node_speed) {
    if (!(s > 0.0) || !std::isfinite(s)) bad("node_speed entries must be > 0");
  }
  if (!(c.truth.base_service_time > 0.0) || !std::isfinite(c.truth.base_service_time)) {
    bad("ground truth base_service_time must be > 0");
  }
  for (Resource r : kResources) {
    if (!std::isfinite(c.truth.slope[r])) bad("ground truth slopes must be finite");
  }
  if (!std::isfinite(c.truth.nonlinear_core)) bad("ground truth nonlinear_core must be finite");
  if (!(c.truth.scv >= 0.0) || !std::isfinite(c.truth.scv)) bad("ground truth scv must be >= 0");
  if (c.arrivals.empty()) bad("arrival schedule is empty");
  if (c.arrivals.front().start != 0.0) bad("arrival schedule must start at 0");
  for (std::size_t i = 0; i < c.arrivals.size(); ++i) {
    const auto& p = c.arrivals[i];
    if (!std::isfinite(p.rate) || p.rate < 0.0) bad("arrival rates must be >= 0");
    if (i > 0 && !(p.start > c.arrivals[i - 1].start)) bad("arrival phases must ascend");
  }
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) bad("horizon must be > 0");
  if (!(c.warmup >= 0.0)) bad("warmup must be >= 0");
  if (!(c.cancel_delay >= 0.0)) bad("cancel_delay must be >= 0");
  if (!(c.migration.per_migration_delay >= 0.0)) bad("migration delay must be >= 0");
  if (c.queue_bound == 0) bad("queue_bound must be > 0");
  if (c.reissue_window == 0) bad("reissue_window must be > 0");
  if (!(c.model_floor > 0.0)) bad("model_floor must be > 0");
  const auto& m = c.monitor;
  if (!(m.system_period > 0.0) || !(m.micro_period > 0.0) || !(m.rate_window > 0.0) ||
      !(m.training_window > 0.0)) {
    bad("monitor periods and windows must be > 0");
  }
  if (!(m.noise >= 0.0)) bad("monitor noise must be >= 0");
  if (m.schedule_samples == 0) bad("monitor schedule_samples must be > 0");
  if (const auto* r = std::get_if<RedundancyPolicy>(&c.policy)) {
    if (r->replicas < 1 || r->replicas > kMaxReplicas) bad("redundancy needs 1..8 replicas");
  }
  if (const auto* r = std::get_if<ReissuePolicy>(&c.policy)) {
    if (!(r->percentile > 0.0 && r->percentile <= 100.0)) bad("reissue percentile must be in (0, 100]");
    if (!(r->prior > 0.0)) bad("reissue prior must be > 0");
  }
  if (const auto* p = std::get_if<PcsPolicy>(&c.policy)) {
    if (!(p->interval > 0.0)) bad("PCS interval must be > 0");
    if (!(p->scheduler.epsilon >= 0.0)) bad("scheduler epsilon must be >= 0");
  }
  for (const auto& job : c.interference) {
    if (job.node >= c.node_count) bad("batch job on unknown node " + std::to_string(job.node));
    if (!(job.duration > 0.0)) bad("batch job durations must be > 0");
    if (!job.contention_footprint.valid()) bad("batch job footprints must be non-negative");
  }
}

}  // namespace

struct Simulator::Impl {
  SimulationConfig cfg;
  SimulationTrace trace;

  std::priority_queue<Event, std::vector<Event>, Later> events;
  std::uint64_t seq = 0;
  std::int64_t now = 0;
  std::int64_t horizon_ns = 0;
  bool aborted = false;

  std::vector<Replica> replicas;
  std::vector<std::uint32_t> free_replicas;
  std::vector<Subtask> subtasks;
  std::vector<std::uint32_t> free_subtasks;
  std::vector<Request> requests;
  std::vector<std::uint32_t> free_requests;
  std::vector<Server> servers;
  std::vector<Node> nodes;
  std::vector<PercentileTracker> trackers;
  std::vector<std::uint32_t> scratch;

  std::mt19937_64 arrival_rng;
  // One service stream per component, so a component's draws do not depend
  // on how much work the policy sends elsewhere.
  std::vector<std::mt19937_64> service_rngs;
  std::mt19937_64 monitor_rng;
  double next_arrival_s = 0.0;
  std::uint64_t arrivals = 0;

  // Monitoring.
  std::uint64_t monitor_ticks = 0;
  std::int64_t last_cache_sample = std::numeric_limits<std::int64_t>::min();
  std::int64_t last_tick = 0;
  std::uint64_t period_arrivals = 0;
  std::deque<std::uint64_t> rate_buckets;
  std::deque<std::pair<std::int64_t, TrainingSample>> training;
  std::size_t intervals = 0;

  explicit Impl(SimulationConfig c) : cfg(std::move(c)) {
    validate(cfg);
    horizon_ns = to_ns(cfg.horizon);
    arrival_rng = stream(cfg.seed, 1);
    for (ComponentId c = 0; c < cfg.placement.size(); ++c) {
      service_rngs.push_back(stream(cfg.seed, 2 + 0x100 * (static_cast<std::uint64_t>(c) + 1)));
    }
    monitor_rng = stream(cfg.seed, 3);

    const std::size_t m = cfg.placement.size();
    servers.resize(m);
    nodes.resize(cfg.node_count);
    for (ComponentId c = 0; c < m; ++c) {
      servers[c].node = cfg.placement[c];
      nodes[cfg.placement[c]].residents.push_back(c);
    }
    trace.component_latencies.assign(m, {});
    trace.busy_time.assign(m, 0.0);
    trace.warmup = cfg.warmup;
    trace.horizon = cfg.horizon;

    const auto* ri = std::get_if<ReissuePolicy>(&cfg.policy);
    for (std::size_t s = 0; s < cfg.stages.size(); ++s) {
      trackers.emplace_back(ri ? ri->percentile : 99.0, cfg.reissue_window,
                            ri ? ri->prior : 1.0);
    }

    for (std::uint32_t j = 0; j < cfg.interference.size(); ++j) {
      const auto& job = cfg.interference[j];
      if (job.start < cfg.horizon) push(to_ns(job.start), EventType::kJobStart, j);
    }
    next_arrival_s = 0.0;
    schedule_next_arrival();
    push(to_ns(cfg.monitor.system_period), EventType::kMonitor);
    if (const auto* p = std::get_if<PcsPolicy>(&cfg.policy)) {
      if (p->interval < cfg.horizon) push(to_ns(p->interval), EventType::kSchedule);
    }
  }

  void push(std::int64_t t, EventType type, std::uint32_t a = 0, std::uint32_t b = 0) {
    events.push(Event{t, seq++, type, a, b});
  }

  bool pcs() const { return std::holds_alternative<PcsPolicy>(cfg.policy); }

  // ---- arrivals ---------------------------------------------------------

  void schedule_next_arrival() {
    if (cfg.max_requests != 0 && arrivals >= cfg.max_requests) return;
    double t = next_arrival_s;
    std::size_t phase = 0;
    while (phase + 1 < cfg.arrivals.size() && cfg.arrivals[phase + 1].start <= t) ++phase;
    while (true) {
      const double rate = cfg.arrivals[phase].rate;
      const double phase_end =
          phase + 1 < cfg.arrivals.size() ? cfg.arrivals[phase + 1].start : cfg.horizon;
      if (rate > 0.0) {
        const double candidate = t + std::exponential_distribution<double>(rate)(arrival_rng);
        if (candidate < phase_end || phase + 1 >= cfg.arrivals.size()) {
          t = candidate;
          break;
        }
      }
      // Memoryless: restart the draw at the next phase boundary.
      if (phase + 1 >= cfg.arrivals.size()) return;
      t = cfg.arrivals[++phase].start;
      if (t >= cfg.horizon) return;
    }
    if (t >= cfg.horizon) return;
    next_arrival_s = t;
    push(to_ns(t), EventType::kArrival);
  }

  void on_arrival() {
    ++arrivals;
    ++period_arrivals;
    std::uint32_t slot;
    if (free_requests.empty()) {
      slot = static_cast<std::uint32_t>(requests.size());
      requests.emplace_back();
    } else {
      slot = free_requests.back();
      free_requests.pop_back();
    }
    Request& rq = requests[slot];
    rq.id = trace.requests.size();
    rq.arrival = now;
    rq.stage = 0;
    rq.measured = to_s(now) >= cfg.warmup;
    trace.requests.push_back(RequestRecord{rq.id, now, -1});
    schedule_next_arrival();
    dispatch_stage(slot);
  }

  // ---- request flow -----------------------------------------------------

  std::uint32_t new_subtask(std::uint32_t request, std::uint32_t stage, std::uint32_t position) {
    std::uint32_t slot;
    if (free_subtasks.empty()) {
      slot = static_cast<std::uint32_t>(subtasks.size());
      subtasks.emplace_back();
    } else {
      slot = free_subtasks.back();
      free_subtasks.pop_back();
    }
    Subtask& st = subtasks[slot];
    st.request = request;
    st.request_id = requests[request].id;
    st.stage = stage;
    st.position = position;
    st.logical = cfg.stages[stage][position];
    st.dispatch = now;
    st.outstanding = 0;
    st.replica_count = 0;
    st.done = false;
    st.reissued = false;
    st.live = true;
    return slot;
  }

  void dispatch_stage(std::uint32_t request) {
    const std::uint32_t stage = requests[request].stage;
    const auto& comps = cfg.stages[stage];
    const auto n = static_cast<std::uint32_t>(comps.size());
    requests[request].pending = n;

    scratch.clear();
    for (std::uint32_t p = 0; p < n; ++p) scratch.push_back(new_subtask(request, stage, p));
    // Copy: dispatching may re-enter and reuse the scratch buffer.
    const std::vector<std::uint32_t> subs = scratch;

    if (const auto* red = std::get_if<RedundancyPolicy>(&cfg.policy)) {
      // Primaries first, then each further round of copies.
      for (std::size_t r = 0; r < red->replicas; ++r) {
        for (std::uint32_t p = 0; p < n; ++p) {
          dispatch_replica(subs[p], comps[(p + r) % n], r > 0);
          if (aborted) return;
        }
      }
      return;
    }
    for (std::uint32_t p = 0; p < n; ++p) {
      dispatch_replica(subs[p], comps[p], false);
      if (aborted) return;
    }
    if (std::holds_alternative<ReissuePolicy>(cfg.policy)) {
      const std::int64_t wait = std::max<std::int64_t>(1, to_ns(trackers[stage].value()));
      for (std::uint32_t p = 0; p < n; ++p) {
        push(now + wait, EventType::kReissue, subs[p], subtasks[subs[p]].gen);
      }
    }
  }

  void dispatch_replica(std::uint32_t sub, ComponentId server, bool is_replica) {
    std::uint32_t slot;
    if (free_replicas.empty()) {
      slot = static_cast<std::uint32_t>(replicas.size());
      replicas.emplace_back();
    } else {
      slot = free_replicas.back();
      free_replicas.pop_back();
    }
    Replica& r = replicas[slot];
    r.subtask = sub;
    r.server = server;
    r.node = servers[server].node;
    r.dispatch = now;
    r.start = -1;
    r.is_replica = is_replica;
    r.state = ReplicaState::kQueued;

    Subtask& st = subtasks[sub];
    st.replicas[st.replica_count++] = slot;
    ++st.outstanding;
    ++trace.counters.replicas_dispatched;

    Server& s = servers[server];
    s.queue.push_back(slot);
    if (s.queue.size() > cfg.queue_bound) {
      abort_run("queue of component " + std::to_string(server) + " exceeded " +
                std::to_string(cfg.queue_bound));
      return;
    }
    try_start(server);
  }

  ContentionVector co_runners(ComponentId c) const {
    const Node& node = nodes[servers[c].node];
    ContentionVector u = node.batch;
    for (ComponentId r : node.residents) {
      if (r != c) u += cfg.component_footprint[r];
    }
    return u;
  }

  double speed(NodeId n) const { return cfg.node_speed.empty() ? 1.0 : cfg.node_speed[n]; }

  double draw_service(ComponentId c, double mean) {
    auto& rng = service_rngs[c];
    switch (cfg.truth.distribution) {
      case ServiceDistribution::kExponential:
        return std::exponential_distribution<double>(1.0 / mean)(rng);
      case ServiceDistribution::kLognormal: {
        const double s2 = std::log1p(cfg.truth.scv);
        return std::lognormal_distribution<double>(std::log(mean) - 0.5 * s2,
                                                   std::sqrt(s2))(rng);
      }
      case ServiceDistribution::kDeterministic: return mean;
    }
    return mean;
  }

  void try_start(ComponentId c) {
    Server& s = servers[c];
    if (s.busy || s.migrating) return;
    while (!s.queue.empty()) {
      const std::uint32_t slot = s.queue.front();
      s.queue.pop_front();
      Replica& r = replicas[slot];
      if (r.state == ReplicaState::kCancelled) {
        release_replica(slot);
        continue;
      }
      const double x = draw_service(c, cfg.truth.mean_service_time(co_runners(c), speed(s.node)));
      const std::int64_t dur = std::max<std::int64_t>(1, to_ns(x));
      r.state = ReplicaState::kRunning;
      r.start = now;
      r.node = s.node;
      s.busy = true;
      s.current = slot;
      s.busy_ns += dur;
      s.obs_sum += x;
      ++s.obs_count;
      ++trace.counters.replicas_served;
      push(now + dur, EventType::kServiceEnd, static_cast<std::uint32_t>(c));
      return;
    }
  }

  void release_replica(std::uint32_t slot) {
    Replica& r = replicas[slot];
    r.state = ReplicaState::kFree;
    ++r.gen;
    free_replicas.push_back(slot);
  }

  void maybe_release_subtask(std::uint32_t sub) {
    Subtask& st = subtasks[sub];
    if (st.live && st.done && st.outstanding == 0) {
      st.live = false;
      ++st.gen;
      free_subtasks.push_back(sub);
    }
  }

  void record(const Replica& r, std::int64_t finish, bool cancelled) {
    if (!cfg.record_replicas) return;
    const Subtask& st = subtasks[r.subtask];
    trace.replicas.push_back(ReplicaRecord{st.request_id, st.stage, st.logical, r.server,
                                           r.node, r.dispatch, r.start, finish, r.is_replica,
                                           cancelled});
  }

  void on_service_end(ComponentId c) {
    Server& s = servers[c];
    const std::uint32_t slot = s.current;
    s.busy = false;
    s.current = kNone;
    finish_replica(slot);
    if (!aborted) try_start(c);
  }

  void finish_replica(std::uint32_t slot) {
    Replica& r = replicas[slot];
    r.state = ReplicaState::kDone;
    record(r, now, false);
    const std::uint32_t sub = r.subtask;
    const ComponentId server = r.server;
    release_replica(slot);

    Subtask& st = subtasks[sub];
    --st.outstanding;
    if (st.done) {
      ++trace.counters.replicas_wasted;
      maybe_release_subtask(sub);
      return;
    }
    st.done = true;
    const double latency = to_s(now - st.dispatch);
    const std::uint32_t request = st.request;
    if (requests[request].measured) trace.component_latencies[server].push_back(latency);
    trackers[st.stage].add(latency);

    for (std::uint8_t i = 0; i < st.replica_count; ++i) {
      const std::uint32_t q = st.replicas[i];
      if (q == slot || replicas[q].subtask != sub || replicas[q].state != ReplicaState::kQueued) {
        continue;
      }
      if (cfg.cancel_delay == 0.0) {
        cancel(q);
      } else {
        push(now + std::max<std::int64_t>(1, to_ns(cfg.cancel_delay)), EventType::kCancel, q,
             replicas[q].gen);
      }
    }
    maybe_release_subtask(sub);

    Request& rq = requests[request];
    if (--rq.pending > 0) return;
    if (++rq.stage < cfg.stages.size()) {
      dispatch_stage(request);
      return;
    }
    trace.requests[rq.id].completion_ns = now;
    free_requests.push_back(request);
  }

  void cancel(std::uint32_t slot) {
    Replica& r = replicas[slot];
    if (r.state != ReplicaState::kQueued) return;
    r.state = ReplicaState::kCancelled;
    ++trace.counters.replicas_cancelled;
    record(r, -1, true);
    // The slot itself is reclaimed when the queue reaches it.
    Subtask& st = subtasks[r.subtask];
    --st.outstanding;
    maybe_release_subtask(r.subtask);
  }

  void on_reissue(std::uint32_t sub, std::uint32_t gen) {
    Subtask& st = subtasks[sub];
    if (st.gen != gen || !st.live || st.done || st.reissued) return;
    st.reissued = true;
    ++trace.counters.reissues;
    const auto& comps = cfg.stages[st.stage];
    dispatch_replica(sub, comps[(st.position + 1) % comps.size()], true);
  }

  void abort_run(std::string reason) {
    if (aborted) return;
    aborted = true;
    trace.saturated = true;
    trace.saturation_reason = std::move(reason);
    events = {};
  }

  // ---- interference -----------------------------------------------------

  void accrue(NodeId n) {
    Node& node = nodes[n];
    if (now > node.accrued_to) {
      ContentionVector level = node.batch;
      level += hosted(n);
      node.area += level * to_s(now - node.accrued_to);
    }
    node.accrued_to = now;
  }

  void recompute_batch(NodeId n) {
    accrue(n);
    ContentionVector sum{};
    for (std::uint32_t j : nodes[n].active_jobs) sum += cfg.interference[j].contention_footprint;
    nodes[n].batch = sum;
  }

  void on_job_start(std::uint32_t j) {
    const auto& job = cfg.interference[j];
    auto& active = nodes[job.node].active_jobs;
    active.insert(std::upper_bound(active.begin(), active.end(), j), j);
    recompute_batch(job.node);
    push(now + std::max<std::int64_t>(1, to_ns(job.duration)), EventType::kJobEnd, j);
  }

  void on_job_end(std::uint32_t j) {
    const auto& job = cfg.interference[j];
    auto& active = nodes[job.node].active_jobs;
    active.erase(std::lower_bound(active.begin(), active.end(), j));
    recompute_batch(job.node);
  }

  // ---- monitoring -------------------------------------------------------

  ContentionVector hosted(NodeId n) const {
    ContentionVector sum{};
    for (ComponentId r : nodes[n].residents) sum += cfg.component_footprint[r];
    return sum;
  }

  double noisy(double v) {
    if (cfg.monitor.noise == 0.0) return v;
    const double f = 1.0 + cfg.monitor.noise * std::normal_distribution<double>(0.0, 1.0)(monitor_rng);
    return f > 0.0 ? v * f : 0.0;
  }

  ContentionVector noisy(const ContentionVector& v) {
    return {noisy(v.core_usage), noisy(v.cache_mpki), noisy(v.disk_bw), noisy(v.network_bw)};
  }

  double rate_estimate() const {
    if (rate_buckets.empty()) return now > 0 ? static_cast<double>(arrivals) / to_s(now) : 0.0;
    std::uint64_t total = 0;
    for (auto b : rate_buckets) total += b;
    return static_cast<double>(total) /
           (static_cast<double>(rate_buckets.size()) * cfg.monitor.system_period);
  }

  MonitorSnapshot snapshot(ComponentId c) {
    const NodeId n = servers[c].node;
    MonitorSnapshot s;
    s.batch_contribution = nodes[n].batch;
    ContentionVector aggregate = nodes[n].batch;
    aggregate += hosted(n);
    s.aggregate = noisy(aggregate);
    s.arrival_rate = rate_estimate();
    return s;
  }

  void on_monitor() {
    ++monitor_ticks;
    const bool cache_due = now - last_cache_sample >= to_ns(cfg.monitor.micro_period);
    if (cache_due) last_cache_sample = now;
    for (NodeId n = 0; n < nodes.size(); ++n) {
      Node& node = nodes[n];
      const ContentionVector mine = hosted(n);
      ContentionVector truth = node.batch;
      truth += mine;
      const std::int64_t span = now - last_tick;
      accrue(n);
      if (span > 0) truth = node.area * (1.0 / to_s(span));
      node.area = {};
      ContentionVector reading = noisy(truth);
      if (cache_due) node.held_cache = reading.cache_mpki;
      reading.cache_mpki = node.held_cache;
      NodeSample sample{reading, reading};
      sample.batch_estimate -= mine;
      node.history.push_back(sample);
      while (node.history.size() > cfg.monitor.schedule_samples) node.history.pop_front();
    }
    last_tick = now;

    if (pcs() || cfg.collect_training) {
      for (ComponentId c = 0; c < servers.size(); ++c) {
        Server& s = servers[c];
        if (s.obs_count == 0) continue;
        ContentionVector u = nodes[s.node].history.back().aggregate;
        u -= cfg.component_footprint[c];
        training.emplace_back(now, TrainingSample{u, s.obs_sum / s.obs_count});
      }
      const std::int64_t oldest = now - to_ns(cfg.monitor.training_window);
      while (!training.empty() && training.front().first < oldest) training.pop_front();
    }
    for (auto& s : servers) {
      s.obs_sum = 0.0;
      s.obs_count = 0;
    }

    rate_buckets.push_back(period_arrivals);
    period_arrivals = 0;
    const auto buckets = static_cast<std::size_t>(
        std::max(1.0, std::round(cfg.monitor.rate_window / cfg.monitor.system_period)));
    while (rate_buckets.size() > buckets) rate_buckets.pop_front();

    const std::int64_t next = to_ns(static_cast<double>(monitor_ticks + 1) * cfg.monitor.system_period);
    if (next <= horizon_ns) push(next, EventType::kMonitor);
  }

  // ---- PCS --------------------------------------------------------------

  void on_schedule() {
    const auto& policy = std::get<PcsPolicy>(cfg.policy);
    ++intervals;
    const std::int64_t next = to_ns(static_cast<double>(intervals + 1) * policy.interval);
    if (next < horizon_ns) push(next, EventType::kSchedule);
    ++trace.counters.schedule_calls;

    std::vector<TrainingSample> samples;
    samples.reserve(training.size());
    for (const auto& t : training) samples.push_back(t.second);
    const double lambda = rate_estimate();
    std::size_t window = cfg.monitor.schedule_samples;
    for (const auto& node : nodes) window = std::min(window, node.history.size());
    if (samples.size() < 8 || lambda <= 0.0 || window == 0) return;

    std::optional<CombinedModel> model;
    try {
      model.emplace(train_combined_model(samples, cfg.model_floor));
    } catch (const Error&) {
      return;  // not enough signal yet; keep the placement
    }

    std::vector<NodeState> states(nodes.size());
    for (NodeId n = 0; n < nodes.size(); ++n) {
      states[n].id = n;
      const auto& h = nodes[n].history;
      for (std::size_t i = h.size() - window; i < h.size(); ++i) {
        states[n].batch_samples.push_back(h[i].batch_estimate);
      }
      for (ComponentId c : nodes[n].residents) {
        states[n].per_component_contribution[c] = cfg.component_footprint[c];
      }
    }
    std::vector<NodeId> placement(servers.size());
    for (ComponentId c = 0; c < servers.size(); ++c) placement[c] = servers[c].node;
    const ClusterState state(ServiceTopology(cfg.stages, placement), std::move(states));

    const auto t0 = std::chrono::steady_clock::now();
    const PerformanceMatrix matrix = build_matrix(state, *model, lambda);
    const ScheduleResult result = schedule(matrix, state, *model, lambda, policy.scheduler);
    trace.scheduler_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cfg.on_schedule) cfg.on_schedule(intervals, matrix, state, result);

    const std::int64_t delay = to_ns(cfg.migration.per_migration_delay);
    for (std::size_t i = 0; i < result.plan.migrations.size(); ++i) {
      const Migration& mig = result.plan.migrations[i];
      const std::int64_t begin = now + static_cast<std::int64_t>(i) * delay;
      trace.migrations.push_back(MigrationEvent{intervals, to_s(begin), mig});
      push(begin, EventType::kMigrationStart, static_cast<std::uint32_t>(mig.component),
           static_cast<std::uint32_t>(mig.destination));
      push(begin + delay, EventType::kMigrationEnd, static_cast<std::uint32_t>(mig.component),
           static_cast<std::uint32_t>(mig.destination));
    }
  }

  void on_migration_end(ComponentId c, NodeId dest) {
    Server& s = servers[c];
    accrue(s.node);
    accrue(dest);
    auto& from = nodes[s.node].residents;
    from.erase(std::find(from.begin(), from.end(), c));
    auto& to = nodes[dest].residents;
    to.insert(std::upper_bound(to.begin(), to.end(), c), c);
    s.node = dest;
    s.migrating = false;
    try_start(c);
  }

  // ---- loop -------------------------------------------------------------

  void step(const Event& e) {
    now = e.time;
    switch (e.type) {
      case EventType::kArrival: on_arrival(); break;
      case EventType::kServiceEnd: on_service_end(e.a); break;
      case EventType::kCancel:
        if (replicas[e.a].gen == e.b) cancel(e.a);
        break;
      case EventType::kReissue: on_reissue(e.a, e.b); break;
      case EventType::kMonitor: on_monitor(); break;
      case EventType::kSchedule: on_schedule(); break;
      case EventType::kMigrationStart: servers[e.a].migrating = true; break;
      case EventType::kMigrationEnd: on_migration_end(e.a, e.b); break;
      case EventType::kJobStart: on_job_start(e.a); break;
      case EventType::kJobEnd: on_job_end(e.a); break;
    }
  }

  void run_until(std::int64_t t) {
    while (!events.empty() && events.top().time <= t) {
      const Event e = events.top();
      events.pop();
      step(e);
    }
    if (t > now && t != std::numeric_limits<std::int64_t>::max()) now = t;
  }

  SimulationTrace finish() {
    run_until(std::numeric_limits<std::int64_t>::max());
    if (aborted && cfg.record_replicas) {
      // Work still queued or in service when the run stopped.
      for (const auto& s : servers) {
        if (s.current != kNone) record(replicas[s.current], -1, false);
        for (std::uint32_t slot : s.queue) {
          if (replicas[slot].state == ReplicaState::kQueued) record(replicas[slot], -1, false);
        }
      }
    }
    for (ComponentId c = 0; c < servers.size(); ++c) trace.busy_time[c] = to_s(servers[c].busy_ns);
    return std::move(trace);
  }
};

Simulator::Simulator(SimulationConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

void Simulator::run_until(double t) { impl_->run_until(to_ns(t)); }
double Simulator::now() const { return to_s(impl_->now); }
MonitorSnapshot Simulator::monitor_snapshot(ComponentId c) {
  if (c >= impl_->servers.size()) {
    throw Error(ErrorCode::kBadConfig, "unknown component " + std::to_string(c));
  }
  return impl_->snapshot(c);
}
SimulationTrace Simulator::finish() { return impl_->finish(); }

std::vector<TrainingSample> Simulator::training_samples() const {
  std::vector<TrainingSample> out;
  out.reserve(impl_->training.size());
  for (const auto& t : impl_->training) out.push_back(t.second);
  return out;
}

SimulationTrace run_simulation(SimulationConfig config) {
  Simulator sim(std::move(config));
  return sim.finish();
}

void write_trace_ndjson(std::ostream& out, const SimulationTrace& trace) {
  using Json = nlohmann::ordered_json;
  for (const auto& r : trace.requests) {
    out << Json{{"kind", "request"},
                {"id", r.id},
                {"arrival_ns", r.arrival_ns},
                {"completion_ns", r.completion_ns}}
               .dump()
        << '\n';
  }
  for (const auto& r : trace.replicas) {
    out << Json{{"kind", "replica"},      {"request", r.request},
                {"stage", r.stage},       {"component", r.logical},
                {"served_by", r.component}, {"node", r.node},
                {"dispatch_ns", r.dispatch_ns}, {"start_ns", r.start_ns},
                {"finish_ns", r.finish_ns}, {"replica", r.replica},
                {"cancelled", r.cancelled}}
               .dump()
        << '\n';
  }
}

}  // namespace pcs::sim
