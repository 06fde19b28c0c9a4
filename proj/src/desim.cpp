#include "hbfq/desim.hpp"

#include "hbfq/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <thread>

namespace hbfq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int side_index(Side s) { return static_cast<int>(s); }

// Batch-means standard error of a ratio estimator sum_b(num) / sum_b(den),
// using per-batch ratios. NaN with fewer than two usable batches.
template <typename Num, typename Den>
double batch_se(int batches, Num num, Den den) {
  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(batches));
  for (int b = 0; b < batches; ++b) {
    const double d = den(b);
    if (d > 0.0) r.push_back(num(b) / d);
  }
  if (r.size() < 2) return kNaN;
  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= static_cast<double>(r.size());
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(r.size() - 1) / static_cast<double>(r.size()));
}

double ratio(double num, double den) { return den > 0.0 ? num / den : kNaN; }

}  // namespace

void SimConfig::validate() const {
  scenario.validate();
  policy.validate(scenario.profile);
  if (horizon < 1) throw InvalidArgument("simulation horizon must be >= 1 arrival");
  if (horizon > kMaxHorizon) throw InvalidArgument("simulation horizon exceeds the supported maximum");
  if (!(warmup >= 0.0 && warmup < 1.0)) throw InvalidArgument("warmup fraction must lie in [0, 1)");
  if (bins < 1) throw InvalidArgument("bin count must be >= 1");
  if (batches < 1) throw InvalidArgument("batch count must be >= 1");
  if (constant_bid && !(*constant_bid >= 0.0)) throw InvalidArgument("constant bid must be >= 0");
}

CellAccumulator& CellAccumulator::operator+=(const CellAccumulator& o) {
  n += o.n;
  beta += o.beta;
  wait += o.wait;
  sojourn += o.sojourn;
  bid += o.bid;
  cost += o.cost;
  return *this;
}

ServerAccumulator& ServerAccumulator::operator+=(const ServerAccumulator& o) {
  arrivals += o.arrivals;
  duration += o.duration;
  area_system += o.area_system;
  area_queue += o.area_queue;
  busy += o.busy;
  payments += o.payments;
  wait += o.wait;
  sojourn += o.sojourn;
  return *this;
}

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::Arrival: return "arrival";
    case TraceKind::ServiceStart: return "service-start";
    case TraceKind::Departure: return "departure";
  }
  return "?";
}

bool RegretTable::significant(double z) const noexcept {
  for (const auto& r : rows)
    if (std::isfinite(r.se_regret) && r.regret > z * r.se_regret) return true;
  return false;
}

double SimReport::post_warmup_arrivals() const {
  double n = 0.0;
  for (const auto& s : servers) n += s.arrivals;
  return n;
}

const CellAccumulator& SimReport::cell(int batch, int bin, Side side) const {
  return cells[(static_cast<std::size_t>(batch) * bins + bin) * 2 + side_index(side)];
}

const ServerAccumulator& SimReport::server(int batch, Side side) const {
  return servers[static_cast<std::size_t>(batch) * 2 + side_index(side)];
}

BinStats SimReport::bin(int k, Side side) const {
  if (k < 0 || k >= bins) throw InvalidArgument("bin index out of range");
  BinStats s;
  s.beta_lo = bin_edges[k];
  s.beta_hi = bin_edges[k + 1];
  CellAccumulator total;
  for (int b = 0; b < batches; ++b) total += cell(b, k, side);
  s.n = total.n;
  s.mean_beta = ratio(total.beta, total.n);
  s.mean_wait = ratio(total.wait, total.n);
  s.mean_sojourn = ratio(total.sojourn, total.n);
  s.mean_bid = ratio(total.bid, total.n);
  s.mean_cost = ratio(total.cost, total.n);
  auto n = [&](int b) { return cell(b, k, side).n; };
  s.se_wait = batch_se(batches, [&](int b) { return cell(b, k, side).wait; }, n);
  s.se_sojourn = batch_se(batches, [&](int b) { return cell(b, k, side).sojourn; }, n);
  s.se_cost = batch_se(batches, [&](int b) { return cell(b, k, side).cost; }, n);
  return s;
}

ServerStats SimReport::server_stats(Side side) const {
  ServerAccumulator t;
  for (int b = 0; b < batches; ++b) t += server(b, side);
  ServerStats s;
  s.arrivals = t.arrivals;
  s.throughput = ratio(t.arrivals, t.duration);
  s.utilization = ratio(t.busy, t.duration);
  s.mean_in_system = ratio(t.area_system, t.duration);
  s.mean_in_queue = ratio(t.area_queue, t.duration);
  s.mean_wait = ratio(t.wait, t.arrivals);
  s.mean_sojourn = ratio(t.sojourn, t.arrivals);
  s.revenue_rate = ratio(t.payments, t.duration);
  s.little_residual = ratio(t.area_system - t.sojourn, t.duration);

  auto arrivals = [&](int b) { return server(b, side).arrivals; };
  auto duration = [&](int b) { return server(b, side).duration; };
  s.se_wait = batch_se(batches, [&](int b) { return server(b, side).wait; }, arrivals);
  s.se_sojourn = batch_se(batches, [&](int b) { return server(b, side).sojourn; }, arrivals);
  s.se_revenue_rate = batch_se(batches, [&](int b) { return server(b, side).payments; }, duration);
  s.se_little = batch_se(
      batches, [&](int b) { return server(b, side).area_system - server(b, side).sojourn; }, duration);
  return s;
}

void SimReport::merge(const SimReport& other) {
  if (other.bins != bins) throw InvalidArgument("cannot merge reports with different bin counts");
  cells.insert(cells.end(), other.cells.begin(), other.cells.end());
  servers.insert(servers.end(), other.servers.begin(), other.servers.end());
  batches += other.batches;
  events += other.events;
}

int bin_index(const SimReport& report, double beta) {
  auto it = std::upper_bound(report.bin_edges.begin() + 1, report.bin_edges.end() - 1, beta);
  return static_cast<int>(it - (report.bin_edges.begin() + 1));
}

namespace {

struct Customer {
  std::uint64_t id = 0;
  double arrival = 0.0;
  double beta = 0.0;
  double work = 0.0;
  double payment = 0.0;
  int batch = -1;  // -1 during warmup
  int bin = 0;
};

// Highest payment first; equal payments in arrival order.
struct HbfOrder {
  bool operator()(const Customer& x, const Customer& y) const {
    if (x.payment != y.payment) return x.payment < y.payment;
    return x.id > y.id;
  }
};

enum class EventKind { Arrival, Departure };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Arrival;
  Side server = Side::Hbf;
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    if (x.time != y.time) return x.time > y.time;
    return x.seq > y.seq;
  }
};

class Simulator {
public:
  explicit Simulator(const SimConfig& cfg) : cfg_(cfg), rng_(cfg.seed), eval_(cfg.scenario, cfg.policy, cfg.variant) {
    report_.scenario = cfg.scenario;
    report_.policy = cfg.policy;
    report_.variant = cfg.variant;
    report_.seed = cfg.seed;
    report_.horizon = cfg.horizon;
    report_.bins = cfg.bins;
    report_.batches = cfg.batches;
    warmup_n_ = static_cast<std::uint64_t>(std::floor(cfg.warmup * static_cast<double>(cfg.horizon)));
    if (warmup_n_ >= cfg.horizon) warmup_n_ = cfg.horizon - 1;
    report_.warmup_arrivals = warmup_n_;
    report_.bin_edges.resize(static_cast<std::size_t>(cfg.bins) + 1);
    for (int k = 0; k <= cfg.bins; ++k)
      report_.bin_edges[k] = cfg.scenario.profile.quantile(static_cast<double>(k) / cfg.bins);
    report_.bin_edges.front() = cfg.scenario.profile.lower();
    report_.bin_edges.back() = cfg.scenario.profile.upper();
    report_.cells.assign(static_cast<std::size_t>(cfg.batches) * cfg.bins * 2, {});
    report_.servers.assign(static_cast<std::size_t>(cfg.batches) * 2, {});
    mu_[0] = cfg.scenario.mu1;
    mu_[1] = cfg.scenario.mu2;
  }

  SimReport run() {
    schedule(next_interarrival(), EventKind::Arrival, Side::Hbf);
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      advance(e.time);
      ++report_.events;
      if (e.kind == EventKind::Arrival)
        on_arrival(e.time);
      else
        on_departure(e.time, e.server);
    }
    return std::move(report_);
  }

private:
  double next_interarrival() { return -std::log1p(-uniform01(rng_)) / cfg_.scenario.lambda; }

  void schedule(double t, EventKind kind, Side server) { events_.push({t, seq_++, kind, server}); }

  std::size_t waiting(int s) const { return s == 0 ? hbf_queue_.size() : fifo_queue_.size(); }

  // Integrates both servers' state over [now_, t) into the current batch.
  void advance(double t) {
    const double dt = t - now_;
    if (current_batch_ >= 0 && dt > 0.0) {
      for (int s = 0; s < 2; ++s) {
        auto& acc = report_.servers[static_cast<std::size_t>(current_batch_) * 2 + s];
        const double q = static_cast<double>(waiting(s));
        const double busy = in_service_[s] ? 1.0 : 0.0;
        acc.duration += dt;
        acc.area_queue += q * dt;
        acc.area_system += (q + busy) * dt;
        acc.busy += busy * dt;
      }
    }
    now_ = t;
  }

  void trace(TraceKind kind, int s, std::uint64_t id, double service_time = 0.0) {
    if (!cfg_.record_trace) return;
    report_.trace.push_back({now_, kind, static_cast<Side>(s), id, waiting(s), in_service_[s].has_value(),
                             service_time});
  }

  void on_arrival(double t) {
    const std::uint64_t i = arrivals_++;
    if (i < cfg_.horizon - 1) schedule(t + next_interarrival(), EventKind::Arrival, Side::Hbf);

    Customer c;
    c.id = i;
    c.arrival = t;
    c.beta = cfg_.scenario.profile.sample(rng_);
    c.work = cfg_.scenario.service.sample(rng_);
    const double u = uniform01(rng_);
    const bool to_fifo = u < cfg_.policy.fifo_probability(c.beta, cfg_.scenario.profile);
    const int s = to_fifo ? 1 : 0;
    if (to_fifo) {
      c.payment = cfg_.scenario.price;
    } else {
      const double x = cfg_.constant_bid ? *cfg_.constant_bid : eval_.bid(c.beta);
      c.payment = cfg_.scenario.min_bid + x;
    }
    if (i >= warmup_n_) {
      const std::uint64_t measured = cfg_.horizon - warmup_n_;
      c.batch = static_cast<int>((i - warmup_n_) * static_cast<std::uint64_t>(cfg_.batches) / measured);
      current_batch_ = c.batch;
      c.bin = bin_index(report_, c.beta);
      auto& acc = report_.servers[static_cast<std::size_t>(c.batch) * 2 + s];
      acc.arrivals += 1.0;
      acc.payments += c.payment;
    }

    if (to_fifo)
      fifo_queue_.push_back(c);
    else
      hbf_queue_.push(c);
    trace(TraceKind::Arrival, s, c.id);
    if (!in_service_[s]) start_service(s);
  }

  void start_service(int s) {
    Customer c;
    if (s == 0) {
      c = hbf_queue_.top();
      hbf_queue_.pop();
    } else {
      c = fifo_queue_.front();
      fifo_queue_.pop_front();
    }
    const double service_time = c.work / mu_[s];
    if (c.batch >= 0) {
      const double w = now_ - c.arrival;
      report_.servers[static_cast<std::size_t>(c.batch) * 2 + s].wait += w;
      report_.cells[(static_cast<std::size_t>(c.batch) * cfg_.bins + c.bin) * 2 + s].wait += w;
    }
    in_service_[s] = c;
    trace(TraceKind::ServiceStart, s, c.id, service_time);
    schedule(now_ + service_time, EventKind::Departure, static_cast<Side>(s));
  }

  void on_departure(double t, Side server) {
    const int s = side_index(server);
    const Customer c = *in_service_[s];
    in_service_[s].reset();
    if (c.batch >= 0) {
      const double sojourn = t - c.arrival;
      report_.servers[static_cast<std::size_t>(c.batch) * 2 + s].sojourn += sojourn;
      auto& cell = report_.cells[(static_cast<std::size_t>(c.batch) * cfg_.bins + c.bin) * 2 + s];
      cell.n += 1.0;
      cell.beta += c.beta;
      cell.sojourn += sojourn;
      cell.bid += c.payment;
      cell.cost += c.payment + c.beta * sojourn;
    }
    if (cfg_.record_departures) report_.departure_order.push_back(c.id);
    trace(TraceKind::Departure, s, c.id);
    if (waiting(s) > 0) start_service(s);
  }

  const SimConfig& cfg_;
  Rng rng_;
  PolicyEvaluation eval_;
  SimReport report_;
  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::priority_queue<Customer, std::vector<Customer>, HbfOrder> hbf_queue_;
  std::deque<Customer> fifo_queue_;
  std::optional<Customer> in_service_[2];
  double mu_[2] = {1.0, 1.0};
  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  std::uint64_t arrivals_ = 0;
  std::uint64_t warmup_n_ = 0;
  int current_batch_ = -1;
};

}  // namespace

SimReport simulate(const SimConfig& config) {
  config.validate();
  Simulator sim(config);
  SimReport report = sim.run();
  if (!config.constant_bid)
    report.regret = empirical_regret(report, config.scenario, config.policy, config.variant);
  return report;
}

RegretTable empirical_regret(const SimReport& report, const Scenario& scenario, const RoutingPolicy& policy,
                             WaitVariant variant) {
  PolicyEvaluation eval(scenario, policy, variant);
  const double a = scenario.profile.lower();
  const double b = scenario.profile.upper();
  constexpr int kLevelGrid = 1000;
  std::vector<double> types(kLevelGrid);
  for (int i = 0; i < kLevelGrid; ++i) types[i] = a + (b - a) * i / (kLevelGrid - 1);
  const auto levels = attainable_levels(eval, types);

  auto other_cost = [&](Side own, double beta) {
    if (own == Side::Hbf) return eval.cost_fifo(beta);
    const BidLevel lv = best_level(beta, levels);
    return lv.payment + beta * lv.sojourn;
  };

  RegretTable table;
  for (int k = 0; k < report.bins; ++k) {
    for (Side side : {Side::Hbf, Side::Fifo}) {
      CellAccumulator total;
      for (int bt = 0; bt < report.batches; ++bt) total += report.cell(bt, k, side);
      if (total.n <= 0.0) continue;
      RegretRow row;
      row.bin = k;
      row.side = side;
      row.beta_lo = report.bin_edges[k];
      row.beta_hi = report.bin_edges[k + 1];
      row.n = total.n;
      row.mean_beta = total.beta / total.n;
      row.own_cost = total.cost / total.n;

      // Counterfactual evaluated per batch at that batch's mean type, so the
      // regret and its standard error see the same type mix.
      double pooled = 0.0;
      std::vector<double> d;
      for (int bt = 0; bt < report.batches; ++bt) {
        const auto& c = report.cell(bt, k, side);
        if (c.n <= 0.0) continue;
        const double other = other_cost(side, c.beta / c.n);
        pooled += c.cost - c.n * other;
        d.push_back(c.cost / c.n - other);
      }
      row.regret = pooled / total.n;
      row.other_cost = row.own_cost - row.regret;
      if (d.size() >= 2) {
        double m = 0.0;
        for (double x : d) m += x;
        m /= static_cast<double>(d.size());
        double ss = 0.0;
        for (double x : d) ss += (x - m) * (x - m);
        row.se_regret = std::sqrt(ss / static_cast<double>(d.size() - 1) / static_cast<double>(d.size()));
      } else {
        row.se_regret = kNaN;
      }
      if (!table.argmax || row.regret > table.rows[*table.argmax].regret) table.argmax = table.rows.size();
      table.rows.push_back(row);
    }
  }
  return table;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SimReport replicate(const SimConfig& config, int replications, unsigned threads) {
  if (replications < 2) throw InvalidArgument("replicate needs at least 2 replications");
  config.validate();
  std::vector<SimReport> runs(static_cast<std::size_t>(replications));
  std::vector<std::string> errors(runs.size());

  auto work = [&](std::size_t r) {
    SimConfig c = config;
    c.seed = derive_seed(config.seed, r);
    c.batches = 1;
    c.record_trace = false;
    c.record_departures = false;
    try {
      Simulator sim(c);
      runs[r] = sim.run();
    } catch (const std::exception& e) {
      errors[r] = e.what();
    }
  };
  unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(replications));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < runs.size(); r = next++) work(r);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw Error(ErrorCode::Internal, "replication failed: " + e);

  SimReport pooled = std::move(runs.front());
  pooled.seed = config.seed;
  for (std::size_t r = 1; r < runs.size(); ++r) pooled.merge(runs[r]);
  if (!config.constant_bid) pooled.regret = empirical_regret(pooled, config.scenario, config.policy, config.variant);
  return pooled;
}

double confidence_halfwidth(double standard_error, int batches, double level) {
  if (batches < 2 || !std::isfinite(standard_error)) return kNaN;
  boost::math::students_t dist(static_cast<double>(batches - 1));
  return boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0)) * standard_error;
}

std::optional<std::pair<double, double>> hbf_subrange(double lo, double hi, const RoutingPolicy& policy,
                                                      const TypeProfile& profile) {
  const auto [flo, fhi] = policy.fifo_interval(profile);
  if (fhi <= flo) return std::make_pair(lo, hi);
  const double below_hi = std::min(hi, flo);
  const double above_lo = std::max(lo, fhi);
  const double below = std::max(0.0, below_hi - lo);
  const double above = std::max(0.0, hi - above_lo);
  if (below <= 0.0 && above <= 0.0) return std::nullopt;
  return below >= above ? std::make_pair(lo, below_hi) : std::make_pair(above_lo, hi);
}

namespace {

void put(std::ostream& os, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  os << buf;
}

}  // namespace

void write_bins_csv(std::ostream& os, const SimReport& report) {
  PolicyEvaluation eval(report.scenario, report.policy, report.variant);
  os << "bin,side,beta_lo,beta_hi,n,mean_beta,mean_wait,se_wait,ci_wait,analytic_wait,mean_sojourn,se_sojourn,"
        "mean_bid,mean_cost,se_cost,regret,se_regret\n";
  for (int k = 0; k < report.bins; ++k) {
    for (Side side : {Side::Hbf, Side::Fifo}) {
      const BinStats s = report.bin(k, side);
      if (s.n <= 0.0) continue;
      double analytic = kNaN;
      if (side == Side::Fifo) {
        analytic = eval.fifo().w2;
      } else if (auto r = hbf_subrange(s.beta_lo, s.beta_hi, report.policy, report.scenario.profile)) {
        analytic = waiting_time(0.5 * (r->first + r->second), eval.hbf());
      }
      double regret = kNaN;
      double se_regret = kNaN;
      if (report.regret) {
        for (const auto& row : report.regret->rows) {
          if (row.bin == k && row.side == side) {
            regret = row.regret;
            se_regret = row.se_regret;
          }
        }
      }
      os << k << ',' << to_string(side);
      for (double v : {s.beta_lo, s.beta_hi, s.n, s.mean_beta, s.mean_wait, s.se_wait,
                       confidence_halfwidth(s.se_wait, report.batches), analytic, s.mean_sojourn, s.se_sojourn,
                       s.mean_bid, s.mean_cost, s.se_cost, regret, se_regret}) {
        os << ',';
        put(os, v);
      }
      os << '\n';
    }
  }
}

void write_servers_csv(std::ostream& os, const SimReport& report) {
  os << "server,arrivals,throughput,utilization,mean_in_system,mean_in_queue,mean_wait,se_wait,ci_wait,"
        "mean_sojourn,se_sojourn,revenue_rate,se_revenue_rate,little_residual,se_little\n";
  for (Side side : {Side::Hbf, Side::Fifo}) {
    const ServerStats s = report.server_stats(side);
    os << to_string(side);
    for (double v : {s.arrivals, s.throughput, s.utilization, s.mean_in_system, s.mean_in_queue, s.mean_wait,
                     s.se_wait, confidence_halfwidth(s.se_wait, report.batches), s.mean_sojourn, s.se_sojourn,
                     s.revenue_rate, s.se_revenue_rate, s.little_residual, s.se_little}) {
      os << ',';
      put(os, v);
    }
    os << '\n';
  }
}

}  // namespace hbfq
