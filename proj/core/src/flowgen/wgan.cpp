#include "tsclab/flowgen/wgan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "tsclab/diffcore/optim.hpp"

namespace tsclab::flowgen {

using diffcore::Grads;
using diffcore::Optimizer;
using diffcore::OptRule;

void WganConfig::validate() const {
  if (epsilon < 0.0) throw std::invalid_argument("WganConfig: epsilon >= 0");
  if (k1 < 0.0 || k2 < 0.0) throw std::invalid_argument("WganConfig: k1,k2 >= 0");
  if (clip <= 0.0) throw std::invalid_argument("WganConfig: clip > 0");
  if (n_critic < 1) throw std::invalid_argument("WganConfig: n_critic >= 1");
  if (lr <= 0.0) throw std::invalid_argument("WganConfig: lr > 0");
  if (iterations < 0) throw std::invalid_argument("WganConfig: iterations >= 0");
  if (batch_size < 1) throw std::invalid_argument("WganConfig: batch_size >= 1");
  if (scale_cap <= 0.0) throw std::invalid_argument("WganConfig: scale_cap > 0");
}

RealStats real_constraint_stats(const flow::FlowSet& real, double scale_cap) {
  if (real.members.empty())
    throw std::invalid_argument("real_constraint_stats: empty set");
  RealStats st;
  double max_delta_counts = 0.0;
  for (const flow::FlowMatrix& m : real.members) {
    st.mean_total += static_cast<double>(m.total());
    for (int r = 0; r < m.route_count(); ++r)
      for (int t = 0; t + 1 < m.time_bins; ++t)
        max_delta_counts = std::max(
            max_delta_counts, std::fabs(static_cast<double>(m.at(r, t + 1)) -
                                        m.at(r, t)));
  }
  st.mean_total /= static_cast<double>(real.members.size()) * scale_cap;
  st.delta_max = std::max(1.0, max_delta_counts) / scale_cap;
  return st;
}

double critic_loss_from_scores(const std::vector<double>& fake_scores,
                               const std::vector<double>& real_scores) {
  if (fake_scores.empty() || real_scores.empty())
    throw std::invalid_argument("critic loss: empty batch");
  double f = 0.0, r = 0.0;
  for (double v : fake_scores) f += v;
  for (double v : real_scores) r += v;
  return f / static_cast<double>(fake_scores.size()) -
         r / static_cast<double>(real_scores.size());
}

double generator_objective(double w_hat, double epsilon, double l_sum,
                           double l_delta, double k1, double k2) {
  const double d = w_hat - epsilon;
  return d * d + k1 * l_sum + k2 * l_delta;
}

ConstraintLosses constraint_losses(
    const std::vector<std::vector<double>>& scaled_fakes, int routes,
    int time_bins, const RealStats& stats) {
  ConstraintLosses out;
  if (scaled_fakes.empty()) return out;
  const double mu = stats.mean_total;
  const double dmax = stats.delta_max;
  for (const std::vector<double>& fake : scaled_fakes) {
    double total = 0.0;
    for (double v : fake) total += v;
    const double rel = (total - mu) / mu;
    out.l_sum += rel * rel;
    double dsum = 0.0;
    for (int r = 0; r < routes; ++r) {
      const double* row = &fake[static_cast<std::size_t>(r) * time_bins];
      for (int t = 0; t + 1 < time_bins; ++t) {
        const double excess = std::fabs(row[t + 1] - row[t]) - dmax;
        if (excess > 0.0) dsum += excess * excess;
      }
    }
    out.l_delta += dsum / (dmax * dmax * routes * (time_bins - 1));
  }
  out.l_sum /= static_cast<double>(scaled_fakes.size());
  out.l_delta /= static_cast<double>(scaled_fakes.size());
  return out;
}

namespace {

std::vector<double> scale_matrix(const flow::FlowMatrix& m, double cap) {
  std::vector<double> out(m.counts.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(m.counts[i]) / cap;
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t batch,
                                        Rng& rng) {
  // Without replacement (partial Fisher-Yates); n >= batch is checked by
  // the caller.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(batch);
  return idx;
}

std::vector<double> draw_noise(int dim, Rng& rng) {
  std::vector<double> z(dim);
  for (double& v : z) v = rng.gaussian(0.0, 1.0);
  return z;
}

// Builds L_delta for one taped fake sample; scalar node.
Tape::VarId delta_penalty(Tape& tape, Tape::VarId fake, int routes,
                          int time_bins, double dmax) {
  std::vector<Tape::VarId> route_sums;
  route_sums.reserve(routes);
  for (int r = 0; r < routes; ++r) {
    Tape::VarId row = tape.slice(fake, static_cast<std::size_t>(r) * time_bins,
                                 time_bins);
    Tape::VarId excess =
        tape.relu(tape.add_const(tape.abs(tape.adjacent_diff(row)), -dmax));
    route_sums.push_back(tape.sum(tape.square(excess)));
  }
  Tape::VarId total = tape.sum_of(route_sums);
  return tape.scale(total, 1.0 / (dmax * dmax * routes * (time_bins - 1)));
}

}  // namespace

TrainResult train_wgan(const flow::FlowSet& real, const WganConfig& cfg) {
  cfg.validate();
  real.validate();
  if (real.members.size() < static_cast<std::size_t>(cfg.batch_size))
    throw std::invalid_argument("train_wgan: |FlowSet| must be >= batch size");
  const flow::FlowMatrix& proto = real.members.front();
  const int routes = proto.route_count();
  const int time_bins = proto.time_bins;

  Rng init_rng(derive_seed(cfg.seed, 0x11));
  Rng batch_rng(derive_seed(cfg.seed, 0x22));
  Rng noise_rng(derive_seed(cfg.seed, 0x33));

  TrainResult res;
  res.critic = CriticNet::init(routes, time_bins, init_rng);
  res.generator = GeneratorNet::init(routes, time_bins, cfg.noise_dim,
                                     cfg.generator_hidden, init_rng);
  res.stats = real_constraint_stats(real, cfg.scale_cap);
  // The critic starts inside the clip box.
  res.critic.clip_weights(cfg.clip);

  std::vector<std::vector<double>> scaled_real;
  scaled_real.reserve(real.members.size());
  for (const flow::FlowMatrix& m : real.members)
    scaled_real.push_back(scale_matrix(m, cfg.scale_cap));

  Optimizer critic_opt(OptRule::adaptive_rms, cfg.lr);
  Optimizer gen_opt(OptRule::adaptive_rms,
                    cfg.generator_lr > 0.0 ? cfg.generator_lr : cfg.lr / 5.0);

  auto abort_diag = [&](const char* what, double value) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "train_wgan: non-finite %s (%g) at generator step %zu",
                  what, value, res.trace.size());
    throw std::runtime_error(buf);
  };

  double last_critic_loss = 0.0;
  auto critic_step = [&]() {
    const auto idx =
        sample_indices(scaled_real.size(), cfg.batch_size, batch_rng);
    Tape tape;
    auto pv = tape.params(res.critic.params);
    std::vector<Tape::VarId> fake_scores, real_scores;
    for (int b = 0; b < cfg.batch_size; ++b) {
      std::vector<double> z = draw_noise(cfg.noise_dim, noise_rng);
      Tape::VarId fake = tape.input(
          diffcore::NumArray::vec(res.generator.forward(z)));
      fake_scores.push_back(res.critic.build(tape, pv, fake));
      Tape::VarId rl = tape.input(
          diffcore::NumArray::vec(scaled_real[idx[b]]));
      real_scores.push_back(res.critic.build(tape, pv, rl));
    }
    Tape::VarId loss =
        tape.sub(tape.mean_of(fake_scores), tape.mean_of(real_scores));
    last_critic_loss = tape.value(loss).data[0];
    if (!std::isfinite(last_critic_loss))
      abort_diag("critic loss", last_critic_loss);
    tape.backward(loss);
    critic_opt.step(res.critic.params, tape.param_grads());
    res.critic.clip_weights(cfg.clip);
  };

  // Critic head start against the frozen initial generator; only then the
  // alternating loop. Skipped entirely when no generator step will run.
  if (cfg.iterations > 0)
    for (int k = 0; k < cfg.critic_warmup; ++k) critic_step();

  for (int it = 0; it < cfg.iterations; ++it) {
    for (int k = 0; k < cfg.n_critic; ++k) critic_step();

    // Generator step: gradients flow through the (frozen) critic into the
    // generator; critic parameters enter the tape as plain inputs.
    const auto idx =
        sample_indices(scaled_real.size(), cfg.batch_size, batch_rng);
    Tape tape;
    auto gen_pv = tape.params(res.generator.params);
    std::map<std::string, Tape::VarId> critic_pv;
    for (const auto& [key, arr] : res.critic.params.entries)
      critic_pv.emplace(key, tape.input(arr));

    std::vector<Tape::VarId> fake_scores, real_scores, sum_terms, delta_terms;
    for (int b = 0; b < cfg.batch_size; ++b) {
      std::vector<double> z = draw_noise(cfg.noise_dim, noise_rng);
      Tape::VarId fake =
          res.generator.build(tape, gen_pv,
                              tape.input(diffcore::NumArray::vec(z)));
      fake_scores.push_back(res.critic.build(tape, critic_pv, fake));
      real_scores.push_back(res.critic.build(
          tape, critic_pv, tape.input(diffcore::NumArray::vec(scaled_real[idx[b]]))));
      Tape::VarId total = tape.sum(fake);
      sum_terms.push_back(tape.square(
          tape.scale(tape.add_const(total, -res.stats.mean_total),
                     1.0 / res.stats.mean_total)));
      delta_terms.push_back(
          delta_penalty(tape, fake, routes, time_bins, res.stats.delta_max));
    }
    Tape::VarId w_hat =
        tape.sub(tape.mean_of(real_scores), tape.mean_of(fake_scores));
    Tape::VarId l_sum = tape.mean_of(sum_terms);
    Tape::VarId l_delta = tape.mean_of(delta_terms);
    Tape::VarId loss = tape.add(
        tape.square(tape.add_const(w_hat, -cfg.epsilon)),
        tape.add(tape.scale(l_sum, cfg.k1), tape.scale(l_delta, cfg.k2)));

    TraceRow row;
    row.step = it;
    row.critic_loss = last_critic_loss;
    row.w_hat = tape.value(w_hat).data[0];
    row.l_sum = tape.value(l_sum).data[0];
    row.l_delta = tape.value(l_delta).data[0];
    if (!std::isfinite(tape.value(loss).data[0]))
      abort_diag("generator loss", tape.value(loss).data[0]);
    res.trace.push_back(row);

    tape.backward(loss);
    gen_opt.step(res.generator.params, tape.param_grads());
  }
  return res;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "step,L_d,W_hat,L_sum,L_delta\n";
  char buf[160];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g\n", r.step,
                  r.critic_loss, r.w_hat, r.l_sum, r.l_delta);
    out << buf;
  }
}

flow::FlowSet sample_flows(const GeneratorNet& gen,
                           const flow::FlowMatrix& prototype,
                           double scale_cap, double epsilon_label, int n,
                           std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample_flows: n must be >= 0");
  Rng rng(derive_seed(seed, 0x44));
  flow::FlowSet out;
  char label[48];
  std::snprintf(label, sizeof label, "generated-at-%g", epsilon_label);
  out.provenance = label;
  for (int i = 0; i < n; ++i) {
    std::vector<double> z = draw_noise(gen.noise_dim, rng);
    const std::vector<double> raw = gen.forward(z);
    flow::FlowMatrix m(prototype.routes, prototype.time_bins,
                       prototype.interval);
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const double counts = raw[k] * scale_cap;
      m.counts[k] =
          counts <= 0.0 ? 0 : static_cast<int>(std::llround(counts));
    }
    m.validate();
    out.members.push_back(std::move(m));
  }
  return out;
}

}  // namespace tsclab::flowgen
