#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ciot/rng.hpp"

namespace ciot {

// Physical and episode parameters of the time-slotted underlay network.
// Defaults are the benchmark operating point.
struct EnvConfig {
  int T = 30;         // slots per episode
  double tau = 1.0;   // slot duration, seconds
  int M = 5;          // licensed channels
  int N = 1;          // secondary users; the engine supports exactly one
  int L = 20;         // PU-active slots per episode, per channel
  double P_p = 0.2;   // PU transmit power, W
  double I_th = 0.01; // interference threshold at the PU, W
  double B_max = 0.5; // battery capacity, J
  double E_max = 0.1; // max harvest per slot, J
  double B_0 = 0.125; // initial battery, J
  double P_min = 0.01;
  double P_max = 0.1;          // SU transmit power bounds, W
  double sigma2 = 0.01;        // noise power, W
  double mean_g_nn = 0.1;      // mean SU-link channel gain
  double mean_g_cross = 0.2;   // mean SU<->PU channel gain
  double phi = 7.0;            // constraint-violation penalty

  int su_obs_dim() const { return 4 * M + 3; }
  int jammer_obs_dim() const { return 5 * M + 5; }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("EnvConfig: " + what); };
    if (M < 1) fail("M must be >= 1");
    if (N != 1) fail("N must be 1");
    if (L < 1 || L >= T) fail("L must satisfy 1 <= L < T");
    if (tau <= 0.0) fail("tau must be positive");
    if (!(P_min > 0.0) || P_min > P_max) fail("powers must satisfy 0 < P_min <= P_max");
    if (B_0 < 0.0 || B_0 > B_max) fail("B_0 must lie in [0, B_max]");
    if (!(I_th > 0.0)) fail("I_th must be positive");
    if (!(sigma2 > 0.0)) fail("sigma2 must be positive");
    if (E_max < 0.0) fail("E_max must be non-negative");
    if (P_p < 0.0) fail("P_p must be non-negative");
    if (!(mean_g_nn > 0.0) || !(mean_g_cross > 0.0)) fail("gain means must be positive");
    if (phi < 0.0) fail("phi must be non-negative");
  }
};

enum class Mode : int { kTransmit = 0, kHarvest = 1 };

struct SuAction {
  Mode mode = Mode::kHarvest;
  int channel = -1;    // meaningful only when transmitting
  double power = 0.0;  // W, meaningful only when transmitting

  static SuAction transmit(int channel, double power) { return {Mode::kTransmit, channel, power}; }
  static SuAction harvest() { return {Mode::kHarvest, -1, 0.0}; }
  bool is_transmit() const { return mode == Mode::kTransmit; }
};

struct JammerAction {
  int channel = 0;
};

// Constraint violations, usable as a bitmask.
namespace violation {
inline constexpr unsigned kEnergyCausality = 1u << 0;  // spend exceeds battery
inline constexpr unsigned kInterference = 1u << 1;     // PU active and P*g_cross above threshold
inline constexpr unsigned kJammedTransmit = 1u << 2;   // transmitted on the jammed channel
inline constexpr unsigned kRange = 1u << 3;            // power outside [P_min, P_max]
}  // namespace violation

// Ground truth for one slot. jam_channel / jam_prev_channel use -1 for
// "no jamming" (slot not yet resolved, or no jammer present).
struct SlotState {
  int t = 0;
  double B = 0.0;       // battery at the start of the slot, J
  double e_prev = 0.0;  // energy harvested in the previous slot, J
  std::vector<std::uint8_t> pu_active;  // per-channel PU occupancy this slot
  int jam_channel = -1;
  int jam_prev_channel = -1;
  std::vector<double> g_nn;     // per-channel SU-link gains this slot
  std::vector<double> g_cross;  // per-channel SU<->PU gains (reciprocal)
  std::optional<SuAction> su_prev_action;
};

struct StepOutcome {
  double rate = 0.0;       // achievable rate actually realized, bits/s/Hz
  double su_reward = 0.0;
  double jammer_reward = 0.0;
  unsigned violations = 0;
  bool transmitted = false;
  bool success = false;    // transmitted with no violations
  double energy_spent = 0.0;        // J
  bool collided_with_jammer = false;
};

// Relative slack applied at the energy and interference boundaries so that
// equality (non-strict constraints) survives floating-point rounding of the
// products.
inline constexpr double kBoundarySlack = 1e-12;

// Rate on an idle channel.
inline double rate_idle(double power, double g_nn, double sigma2) {
  return std::log2(1.0 + power * g_nn / sigma2);
}

// Rate under PU interference.
inline double rate_interfered(double power, double g_nn, double pu_power, double g_mn,
                              double sigma2) {
  return std::log2(1.0 + power * g_nn / (pu_power * g_mn + sigma2));
}

// Effective rate for the chosen action: zero when harvesting or when the
// chosen channel is jammed, otherwise the idle or interfered rate of the
// chosen channel.
inline double effective_rate(const EnvConfig& cfg, const SlotState& state, const SuAction& a) {
  if (!a.is_transmit()) return 0.0;
  if (a.channel == state.jam_channel) return 0.0;
  const auto c = static_cast<std::size_t>(a.channel);
  if (state.pu_active[c]) {
    return rate_interfered(a.power, state.g_nn[c], cfg.P_p, state.g_cross[c], cfg.sigma2);
  }
  return rate_idle(a.power, state.g_nn[c], cfg.sigma2);
}

// Battery recursion: min(B + d*e - (1-d)*P*tau, B_max). Callers are expected
// to nullify infeasible transmits before applying it.
inline double battery_update(double B, const SuAction& a, double e, double tau, double B_max) {
  const double d = a.is_transmit() ? 0.0 : 1.0;
  return std::min(B + d * e - (1.0 - d) * a.power * tau, B_max);
}

// Feasibility of a transmit decision in the current slot. Harvesting is
// always feasible. Both energy and interference bounds are non-strict.
inline unsigned check_constraints(const EnvConfig& cfg, const SlotState& state,
                                  const SuAction& a) {
  if (!a.is_transmit()) return 0;
  unsigned mask = 0;
  if (a.power * cfg.tau > state.B * (1.0 + kBoundarySlack)) mask |= violation::kEnergyCausality;
  const auto c = static_cast<std::size_t>(a.channel);
  if (state.pu_active[c] &&
      a.power * state.g_cross[c] > cfg.I_th * (1.0 + kBoundarySlack)) {
    mask |= violation::kInterference;
  }
  if (a.channel == state.jam_channel) mask |= violation::kJammedTransmit;
  if (a.power < cfg.P_min || a.power > cfg.P_max) mask |= violation::kRange;
  return mask;
}

// One row of the per-slot debug trace.
struct TraceRow {
  int t = 0;
  double B = 0.0;  // battery at the start of the slot
  double e = 0.0;  // energy harvested this slot
  int d = 1;
  int c = -1;
  double P = 0.0;
  int jam_channel = -1;
  int pu_active_c = 0;  // PU occupancy of the chosen channel (0 when harvesting)
  double rate = 0.0;
  double reward = 0.0;
  unsigned violations = 0;
};

void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& os);

// A seeded episode. Identical (config, seed) pairs reproduce identical
// episodes bit-exactly: the per-slot RNG consumption is independent of the
// actions taken.
class Environment {
 public:
  Environment(const EnvConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
    cfg_.validate();
    schedule_.assign(static_cast<std::size_t>(cfg_.M), {});
    std::vector<int> picks;
    for (auto& row : schedule_) {
      row.assign(static_cast<std::size_t>(cfg_.T), 0);
      rng_.sample_indices(cfg_.T, cfg_.L, picks);
      for (int slot : picks) row[static_cast<std::size_t>(slot)] = 1;
    }
    state_.t = 0;
    state_.B = cfg_.B_0;
    state_.e_prev = 0.0;
    state_.jam_channel = -1;
    state_.jam_prev_channel = -1;
    state_.su_prev_action.reset();
    sample_slot_gains(rng_, cfg_, state_.g_nn, state_.g_cross);
    load_pu_column();
  }

  // Draws the per-channel fading gains of one slot.
  static void sample_slot_gains(Rng& rng, const EnvConfig& cfg, std::vector<double>& g_nn,
                                std::vector<double>& g_cross) {
    g_nn.resize(static_cast<std::size_t>(cfg.M));
    g_cross.resize(static_cast<std::size_t>(cfg.M));
    for (auto& g : g_nn) g = rng.exponential(cfg.mean_g_nn);
    for (auto& g : g_cross) g = rng.exponential(cfg.mean_g_cross);
  }

  const EnvConfig& config() const { return cfg_; }
  const SlotState& state() const { return state_; }
  bool done() const { return state_.t >= cfg_.T; }
  const std::vector<std::vector<std::uint8_t>>& schedule() const { return schedule_; }

  void set_trace_enabled(bool on) { trace_enabled_ = on; }
  const std::vector<TraceRow>& trace() const { return trace_; }

  // Advances one slot. The jammer commits first; the SU action was chosen
  // without seeing the current jam channel. A violating transmit is
  // physically nullified: no rate, no energy spent, no harvest, penalty -phi.
  StepOutcome step(const SuAction& su, const std::optional<JammerAction>& jam) {
    if (done()) throw std::logic_error("Environment::step: episode exhausted");
    if (jam) {
      if (jam->channel < 0 || jam->channel >= cfg_.M)
        throw std::invalid_argument("JammerAction: channel out of range");
      state_.jam_channel = jam->channel;
    } else {
      state_.jam_channel = -1;
    }
    if (su.is_transmit() && (su.channel < 0 || su.channel >= cfg_.M))
      throw std::invalid_argument("SuAction: channel out of range");

    StepOutcome out;
    out.transmitted = su.is_transmit();
    out.violations = check_constraints(cfg_, state_, su);
    out.success = out.transmitted && out.violations == 0;
    out.rate = out.success ? effective_rate(cfg_, state_, su) : 0.0;
    out.su_reward = out.transmitted ? (out.success ? out.rate : -cfg_.phi) : 0.0;
    out.jammer_reward = -out.rate;
    out.collided_with_jammer = out.transmitted && state_.jam_channel >= 0 &&
                               su.channel == state_.jam_channel;

    // The harvest draw happens every slot so the RNG stream does not depend
    // on the action; it is credited only in harvest mode.
    const double e = rng_.uniform(0.0, cfg_.E_max);
    double harvested = 0.0;
    double next_B = state_.B;
    if (!out.transmitted) {
      harvested = e;
      next_B = battery_update(state_.B, su, e, cfg_.tau, cfg_.B_max);
    } else if (out.success) {
      out.energy_spent = su.power * cfg_.tau;
      next_B = battery_update(state_.B, su, 0.0, cfg_.tau, cfg_.B_max);
    }
    // Guard the boundary slack: an exact-boundary spend may round a hair
    // below zero.
    next_B = std::clamp(next_B, 0.0, cfg_.B_max);

    if (trace_enabled_) {
      trace_.push_back({state_.t, state_.B, harvested, su.is_transmit() ? 0 : 1,
                        su.is_transmit() ? su.channel : -1, su.is_transmit() ? su.power : 0.0,
                        state_.jam_channel,
                        su.is_transmit() ? int(state_.pu_active[static_cast<std::size_t>(su.channel)]) : 0,
                        out.rate, out.su_reward, out.violations});
    }

    state_.B = next_B;
    state_.e_prev = harvested;
    state_.jam_prev_channel = state_.jam_channel;
    state_.jam_channel = -1;
    state_.su_prev_action = su;
    state_.t += 1;
    sample_slot_gains(rng_, cfg_, state_.g_nn, state_.g_cross);
    load_pu_column();
    return out;
  }

  // SU view of the state: everything except the current slot's jam channel.
  // Layout: [B/B_max, e_prev/E_max, pu_active (M), one-hot jam_prev (M),
  // g_nn/mean (M), g_cross/mean (M), t/T]; length 4M+3.
  std::vector<double> observe_su() const {
    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(cfg_.su_obs_dim()));
    f.push_back(state_.B / cfg_.B_max);
    f.push_back(cfg_.E_max > 0.0 ? state_.e_prev / cfg_.E_max : 0.0);
    for (int m = 0; m < cfg_.M; ++m) f.push_back(double(state_.pu_active[static_cast<std::size_t>(m)]));
    for (int m = 0; m < cfg_.M; ++m) f.push_back(state_.jam_prev_channel == m ? 1.0 : 0.0);
    for (int m = 0; m < cfg_.M; ++m) f.push_back(state_.g_nn[static_cast<std::size_t>(m)] / cfg_.mean_g_nn);
    for (int m = 0; m < cfg_.M; ++m) f.push_back(state_.g_cross[static_cast<std::size_t>(m)] / cfg_.mean_g_cross);
    f.push_back(double(state_.t) / double(cfg_.T));
    return f;
  }

  // Jammer view: the SU view plus the SU's previous action
  // [d_prev, one-hot c_prev (M), P_prev/P_max]; length 5M+5.
  std::vector<double> observe_jammer() const {
    std::vector<double> f = observe_su();
    f.reserve(static_cast<std::size_t>(cfg_.jammer_obs_dim()));
    const auto& prev = state_.su_prev_action;
    const bool prev_tx = prev.has_value() && prev->is_transmit();
    f.push_back(prev.has_value() && !prev->is_transmit() ? 1.0 : 0.0);
    for (int m = 0; m < cfg_.M; ++m) f.push_back(prev_tx && prev->channel == m ? 1.0 : 0.0);
    f.push_back(prev_tx ? prev->power / cfg_.P_max : 0.0);
    return f;
  }

 private:
  void load_pu_column() {
    state_.pu_active.assign(static_cast<std::size_t>(cfg_.M), 0);
    if (state_.t < cfg_.T) {
      for (int m = 0; m < cfg_.M; ++m)
        state_.pu_active[static_cast<std::size_t>(m)] =
            schedule_[static_cast<std::size_t>(m)][static_cast<std::size_t>(state_.t)];
    }
  }

  EnvConfig cfg_;
  Rng rng_;
  std::vector<std::vector<std::uint8_t>> schedule_;  // [channel][slot]
  SlotState state_;
  bool trace_enabled_ = false;
  std::vector<TraceRow> trace_;
};

}  // namespace ciot
