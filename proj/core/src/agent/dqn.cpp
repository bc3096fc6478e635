#include "tsclab/agent/dqn.hpp"

#include <algorithm>
#include <stdexcept>

#include "tsclab/diffcore/optim.hpp"

namespace tsclab::agent {

void DqnConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("DqnConfig: 0 <= gamma < 1");
  if (alpha <= 0.0) throw std::invalid_argument("DqnConfig: alpha > 0");
  if (batch_size < 1) throw std::invalid_argument("DqnConfig: batch_size >= 1");
  if (eps_start < 0.0 || eps_start > 1.0 || eps_end < 0.0 || eps_end > 1.0)
    throw std::invalid_argument("DqnConfig: eps in [0,1]");
  if (capacity == 0) throw std::invalid_argument("DqnConfig: capacity > 0");
}

double DqnConfig::epsilon_at(long decision) const {
  if (eps_decay_steps <= 0) return eps_end;
  if (decision >= eps_decay_steps) return eps_end;
  const double frac = static_cast<double>(decision) / eps_decay_steps;
  return eps_start + (eps_end - eps_start) * frac;
}

int select_action(std::span<const double> q, double explore_eps, Rng& rng) {
  if (explore_eps < 0.0 || explore_eps > 1.0)
    throw std::invalid_argument("select_action: eps must be in [0,1]");
  if (explore_eps > 0.0 && rng.uniform() < explore_eps)
    return static_cast<int>(rng.uniform_int(q.size()));
  int best = 0;
  for (std::size_t a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = static_cast<int>(a);
  return best;
}

namespace {

double target_value(const ParamStore& target, const Transition& t,
                    double gamma) {
  if (gamma == 0.0) return t.reward;
  const std::vector<double> qn = q_values(target, t.next_state);
  return t.reward + gamma * *std::max_element(qn.begin(), qn.end());
}

}  // namespace

double dqn_loss(const ParamStore& online, const ParamStore& target,
                std::span<const Transition* const> batch, double gamma) {
  if (batch.empty()) throw std::invalid_argument("dqn_loss: empty batch");
  double acc = 0.0;
  for (const Transition* t : batch) {
    const double y = target_value(target, *t, gamma);
    const double q = q_values(online, t->state)[t->action];
    const double d = y - q;
    acc += d * d;
  }
  return acc / static_cast<double>(batch.size());
}

diffcore::Grads dqn_loss_grads(const ParamStore& online,
                               const ParamStore& target,
                               std::span<const Transition* const> batch,
                               double gamma, double* loss_out) {
  if (batch.empty())
    throw std::invalid_argument("dqn_loss_grads: empty batch");
  Tape tape;
  auto pv = tape.params(online);
  std::vector<Tape::VarId> terms;
  terms.reserve(batch.size());
  for (const Transition* t : batch) {
    const double y = target_value(target, *t, gamma);
    Tape::VarId q = qnet_graph(
        tape, pv, tape.input(diffcore::NumArray::vec(t->state)));
    Tape::VarId qa = tape.pick(q, static_cast<std::size_t>(t->action));
    terms.push_back(tape.square(tape.add_const(qa, -y)));
  }
  Tape::VarId loss = tape.mean_of(terms);
  if (loss_out) *loss_out = tape.value(loss).data[0];
  tape.backward(loss);
  return tape.param_grads();
}

bool local_update(QNet& qnet, const ReplayMemory& memory,
                  const DqnConfig& cfg, int steps, Rng& rng) {
  cfg.validate();
  if (memory.size() < static_cast<std::size_t>(cfg.batch_size)) return false;
  for (int s = 0; s < steps; ++s) {
    const auto batch = memory.sample(cfg.batch_size, rng);
    const diffcore::Grads grads =
        dqn_loss_grads(qnet.online, qnet.target, batch, cfg.gamma);
    diffcore::plain_gradient_step(qnet.online, grads, cfg.alpha);
    ++qnet.grad_steps;
    if (cfg.target_sync_period > 0 &&
        qnet.grad_steps % cfg.target_sync_period == 0)
      qnet.sync_target();
  }
  return true;
}

}  // namespace tsclab::agent
