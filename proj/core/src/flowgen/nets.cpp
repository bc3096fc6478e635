#include "tsclab/flowgen/nets.hpp"

#include <cmath>
#include <stdexcept>

#include "tsclab/diffcore/kernels.hpp"

namespace tsclab::flowgen {

CriticNet CriticNet::init(int routes, int time_bins, Rng& rng) {
  if (time_bins < 9)
    throw std::invalid_argument(
        "CriticNet: two width-5 conv layers need T >= 9, got T = " +
        std::to_string(time_bins));
  if (routes < 1) throw std::invalid_argument("CriticNet: routes must be >= 1");
  CriticNet c;
  c.routes = routes;
  c.time_bins = time_bins;
  diffcore::init_conv_layer(c.params, "conv1", 5, rng);
  diffcore::init_conv_layer(c.params, "conv2", 5, rng);
  const std::size_t embed =
      static_cast<std::size_t>(routes) * (time_bins - 8);
  diffcore::init_dense_layer(c.params, "out", embed, 1, rng);
  return c;
}

double CriticNet::forward(std::span<const double> x) const {
  const std::size_t expect = static_cast<std::size_t>(routes) * time_bins;
  if (x.size() != expect)
    throw std::invalid_argument("CriticNet::forward: expected " +
                                std::to_string(expect) + " inputs, got " +
                                std::to_string(x.size()));
  std::vector<double> embed;
  embed.reserve(static_cast<std::size_t>(routes) * embed_len());
  for (int r = 0; r < routes; ++r) {
    std::span<const double> row = x.subspan(
        static_cast<std::size_t>(r) * time_bins, time_bins);
    std::vector<double> h = diffcore::conv1d_forward(params, "conv1", row);
    std::vector<double> e = diffcore::conv1d_forward(params, "conv2", h);
    embed.insert(embed.end(), e.begin(), e.end());
  }
  return diffcore::dense_forward(params, "out", embed)[0];
}

Tape::VarId CriticNet::build(Tape& tape,
                             const std::map<std::string, Tape::VarId>& pv,
                             Tape::VarId x) const {
  const std::size_t expect = static_cast<std::size_t>(routes) * time_bins;
  if (tape.value(x).size() != expect)
    throw std::invalid_argument("CriticNet::build: input shape mismatch");
  std::vector<Tape::VarId> embeds;
  embeds.reserve(routes);
  for (int r = 0; r < routes; ++r) {
    Tape::VarId row = tape.slice(x, static_cast<std::size_t>(r) * time_bins,
                                 time_bins);
    Tape::VarId h = tape.sigmoid(
        tape.conv1d(pv.at("conv1.w"), pv.at("conv1.b"), row));
    Tape::VarId e = tape.sigmoid(
        tape.conv1d(pv.at("conv2.w"), pv.at("conv2.b"), h));
    embeds.push_back(e);
  }
  Tape::VarId embed = tape.concat(embeds);
  return tape.dense(pv.at("out.w"), pv.at("out.b"), embed);
}

void CriticNet::clip_weights(double c) {
  if (c <= 0.0) throw std::invalid_argument("clip_weights: c must be > 0");
  for (auto& [key, arr] : params.entries)
    for (double& v : arr.data) v = std::clamp(v, -c, c);
}

double CriticNet::max_abs_weight() const {
  double m = 0.0;
  for (const auto& [key, arr] : params.entries)
    for (double v : arr.data) m = std::max(m, std::fabs(v));
  return m;
}

GeneratorNet GeneratorNet::init(int routes, int time_bins, int noise_dim,
                                int hidden, Rng& rng) {
  GeneratorNet g;
  g.routes = routes;
  g.time_bins = time_bins;
  g.noise_dim = noise_dim;
  g.hidden = hidden;
  diffcore::init_dense_layer(g.params, "fc1", noise_dim, hidden, rng);
  diffcore::init_dense_layer(
      g.params, "fc2", hidden,
      static_cast<std::size_t>(routes) * time_bins, rng);
  return g;
}

std::vector<double> GeneratorNet::forward(std::span<const double> z) const {
  if (z.size() != static_cast<std::size_t>(noise_dim))
    throw std::invalid_argument("GeneratorNet::forward: bad noise size");
  std::vector<double> h = diffcore::dense_forward(params, "fc1", z);
  diffcore::relu_inplace(h);
  return diffcore::dense_forward(params, "fc2", h);
}

Tape::VarId GeneratorNet::build(Tape& tape,
                                const std::map<std::string, Tape::VarId>& pv,
                                Tape::VarId z) const {
  Tape::VarId h = tape.relu(tape.dense(pv.at("fc1.w"), pv.at("fc1.b"), z));
  return tape.dense(pv.at("fc2.w"), pv.at("fc2.b"), h);
}

}  // namespace tsclab::flowgen
