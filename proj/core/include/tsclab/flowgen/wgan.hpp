#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tsclab/flow/matrix.hpp"
#include "tsclab/flowgen/nets.hpp"

namespace tsclab::flowgen {

struct WganConfig {
  double epsilon = 0.0;  // target W-distance for the generator objective
  double k1 = 0.5;       // weight of the total-count constraint
  double k2 = 0.5;       // weight of the adjacent-delta constraint
  double clip = 0.01;    // critic weight clip c
  int n_critic = 5;      // critic steps per generator step
  int critic_warmup = 50;  // extra critic-only steps before the loop
  double lr = 5e-4;      // adaptive-rms learning rate (critic)
  double generator_lr = 0.0;  // 0 -> lr / 5; keeps the critic ahead
  int iterations = 300;  // generator steps
  std::uint64_t seed = 0;
  int batch_size = 8;
  int noise_dim = 16;
  int generator_hidden = 64;
  double scale_cap = 30.0;  // counts are divided by this before the critic

  void validate() const;
};

// Constraint statistics over the real set, in critic (scaled) space:
// mean total count and the largest adjacent-interval delta (floored at one
// vehicle). The constraint losses are scale-free, so evaluating them in
// scaled space equals evaluating in count space.
struct RealStats {
  double mean_total = 0.0;
  double delta_max = 0.0;
};
RealStats real_constraint_stats(const flow::FlowSet& real, double scale_cap);

// L_d = mean F(fake) - mean F(real); score-level arithmetic.
double critic_loss_from_scores(const std::vector<double>& fake_scores,
                               const std::vector<double>& real_scores);

// (W_hat - eps)^2 + k1 L_sum + k2 L_delta.
double generator_objective(double w_hat, double epsilon, double l_sum,
                           double l_delta, double k1, double k2);

// (L_sum, L_delta) of a batch of scaled fake matrices.
struct ConstraintLosses {
  double l_sum = 0.0;
  double l_delta = 0.0;
};
ConstraintLosses constraint_losses(
    const std::vector<std::vector<double>>& scaled_fakes, int routes,
    int time_bins, const RealStats& stats);

struct TraceRow {
  int step = 0;
  double critic_loss = 0.0;  // last L_d before this generator step
  double w_hat = 0.0;        // mean F(real) - mean F(fake)
  double l_sum = 0.0;
  double l_delta = 0.0;
};

struct TrainResult {
  GeneratorNet generator;
  CriticNet critic;
  std::vector<TraceRow> trace;
  RealStats stats;
};

// Alternating WGAN loop: n_critic clipped critic steps per generator step,
// adaptive-rms updates on both, fixed iteration budget. Aborts with a
// diagnostic trace if a loss turns non-finite.
TrainResult train_wgan(const flow::FlowSet& real, const WganConfig& cfg);

// CSV (step,L_d,W_hat,L_sum,L_delta).
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

// Draws n seeded noise vectors, forwards them, rescales to counts, clamps
// negatives to zero and rounds. Provenance is tagged "generated-at-<eps>".
flow::FlowSet sample_flows(const GeneratorNet& gen,
                           const flow::FlowMatrix& prototype,
                           double scale_cap, double epsilon_label, int n,
                           std::uint64_t seed);

}  // namespace tsclab::flowgen
