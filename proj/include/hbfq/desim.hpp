#pragma once

#include "hbfq/equilibrium.hpp"
#include "hbfq/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hbfq {

struct SimConfig {
  Scenario scenario;
  RoutingPolicy policy;
  /// Selects the bid curve X used by HBF joiners.
  WaitVariant variant = WaitVariant::Standard;
  /// When set, every HBF joiner bids this amount above the minimum bid.
  std::optional<double> constant_bid;
  std::uint64_t horizon = 1'000'000;  // arrivals
  double warmup = 0.1;                // fraction of the horizon discarded
  std::uint64_t seed = 1;
  int bins = 50;      // equal-probability bins under F
  int batches = 20;   // batch-means groups over post-warmup arrivals
  bool record_trace = false;
  bool record_departures = false;

  void validate() const;
};

inline constexpr std::uint64_t kMaxHorizon = 10'000'000'000ULL;

/// Sums over the customers of one (batch, bin, server) cell.
struct CellAccumulator {
  double n = 0.0;
  double beta = 0.0;
  double wait = 0.0;
  double sojourn = 0.0;
  double bid = 0.0;   // payment at HBF, price at FIFO
  double cost = 0.0;  // payment + beta * sojourn

  CellAccumulator& operator+=(const CellAccumulator& o);
};

/// Time integrals of one server over one batch. Customer sums are assigned to
/// the batch of arrival.
struct ServerAccumulator {
  double arrivals = 0.0;
  double duration = 0.0;
  double area_system = 0.0;
  double area_queue = 0.0;
  double busy = 0.0;
  double payments = 0.0;
  double wait = 0.0;
  double sojourn = 0.0;

  ServerAccumulator& operator+=(const ServerAccumulator& o);
};

enum class TraceKind { Arrival, ServiceStart, Departure };

std::string_view to_string(TraceKind kind);

struct TraceEvent {
  double time = 0.0;
  TraceKind kind = TraceKind::Arrival;
  Side server = Side::Hbf;
  std::uint64_t customer = 0;
  /// Customers waiting (not in service) at this server after the event.
  std::uint64_t queue_length = 0;
  bool busy = false;
  /// Service time of the customer, on ServiceStart.
  double service_time = 0.0;
};

struct BinStats {
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double n = 0.0;
  double mean_beta = 0.0;
  double mean_wait = 0.0;
  double se_wait = 0.0;
  double mean_sojourn = 0.0;
  double se_sojourn = 0.0;
  double mean_bid = 0.0;
  double mean_cost = 0.0;
  double se_cost = 0.0;
};

struct ServerStats {
  double arrivals = 0.0;
  double throughput = 0.0;
  double utilization = 0.0;
  double mean_in_system = 0.0;
  double mean_in_queue = 0.0;
  double mean_wait = 0.0;
  double se_wait = 0.0;
  double mean_sojourn = 0.0;
  double se_sojourn = 0.0;
  double revenue_rate = 0.0;
  double se_revenue_rate = 0.0;
  /// L - lambda W on the measurement window, and its batch-means standard error.
  double little_residual = 0.0;
  double se_little = 0.0;
};

struct RegretRow {
  int bin = 0;
  Side side = Side::Hbf;
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double n = 0.0;
  double mean_beta = 0.0;
  /// Empirical cost on the assigned server.
  double own_cost = 0.0;
  /// Analytic cost of the best alternative at the bin's mean type.
  double other_cost = 0.0;
  double regret = 0.0;
  double se_regret = 0.0;
};

struct RegretTable {
  std::vector<RegretRow> rows;
  std::optional<std::size_t> argmax;

  double max_regret() const noexcept { return argmax ? rows[*argmax].regret : 0.0; }
  /// True when some row's regret exceeds z standard errors above zero.
  bool significant(double z = 3.0) const noexcept;
};

struct SimReport {
  Scenario scenario;
  RoutingPolicy policy;
  WaitVariant variant = WaitVariant::Standard;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  std::uint64_t warmup_arrivals = 0;
  std::uint64_t events = 0;
  int bins = 0;
  int batches = 0;
  std::vector<double> bin_edges;              // bins + 1 entries
  std::vector<CellAccumulator> cells;         // [batch][bin][side]
  std::vector<ServerAccumulator> servers;     // [batch][side]
  std::vector<TraceEvent> trace;
  std::vector<std::uint64_t> departure_order;
  /// Filled by simulate when the bid curve is the equilibrium one.
  std::optional<RegretTable> regret;

  double post_warmup_arrivals() const;
  const CellAccumulator& cell(int batch, int bin, Side side) const;
  const ServerAccumulator& server(int batch, Side side) const;

  BinStats bin(int k, Side side) const;
  ServerStats server_stats(Side side) const;

  /// Appends the batches of `other`, which must describe the same configuration
  /// up to the seed. Used to pool independent replications.
  void merge(const SimReport& other);
};

/// Index of the equal-probability bin containing beta.
int bin_index(const SimReport& report, double beta);

/// Runs one replication. Deterministic given the config. Per arrival the RNG is
/// consumed in a fixed order: interarrival, type, service work, routing draw.
SimReport simulate(const SimConfig& config);

/// Per-bin assigned-side empirical cost against the analytic cost of the other
/// option (FIFO, or the cheapest attainable HBF bid level).
RegretTable empirical_regret(const SimReport& report, const Scenario& scenario, const RoutingPolicy& policy,
                             WaitVariant variant = WaitVariant::Standard);

/// Independent replications with derived seeds, pooled so that each
/// replication is one batch. Replications run concurrently.
SimReport replicate(const SimConfig& config, int replications, unsigned threads = 0);

/// Seed of replication `index` derived from `base` (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Two-sided Student-t confidence half-width for a batch-means standard error.
double confidence_halfwidth(double standard_error, int batches, double level = 0.95);

/// Types of a bin that join HBF under the policy: the bin minus the FIFO
/// interval. Returns the sub-range on the larger side, or nullopt if empty.
std::optional<std::pair<double, double>> hbf_subrange(double lo, double hi, const RoutingPolicy& policy,
                                                      const TypeProfile& profile);

/// One row per (bin, server) with samples; includes the analytic wait at the
/// bin midpoint and the regret when available.
void write_bins_csv(std::ostream& os, const SimReport& report);
void write_servers_csv(std::ostream& os, const SimReport& report);

}  // namespace hbfq
