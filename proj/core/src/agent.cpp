#include "cqrlab/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cqrlab/error.hpp"
#include "cqrlab/losses.hpp"

namespace cqrlab {

Algo parse_algo(std::string_view name) {
  if (name == "dqn") return Algo::dqn;
  if (name == "qrdqn") return Algo::qrdqn;
  if (name == "cql") return Algo::cql;
  if (name == "cqr") return Algo::cqr;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "' (expected one of {dqn,qrdqn,cql,cqr})");
}

std::string to_string(Algo algo) {
  switch (algo) {
    case Algo::dqn: return "dqn";
    case Algo::qrdqn: return "qrdqn";
    case Algo::cql: return "cql";
    case Algo::cqr: return "cqr";
  }
  return "?";
}

bool is_quantile(Algo algo) { return algo == Algo::qrdqn || algo == Algo::cqr; }
bool is_conservative(Algo algo) { return algo == Algo::cql || algo == Algo::cqr; }

double EpsilonSchedule::at(int episode, int train_episodes) const {
  const int span = decay_episodes > 0 ? decay_episodes
                                      : std::max(1, static_cast<int>(0.8 * train_episodes));
  if (episode >= span) return end;
  return start + (end - start) * static_cast<double>(episode) / span;
}

AgentConfig default_agent_config(Algo algo) {
  AgentConfig cfg;
  cfg.algo = algo;
  cfg.num_quantiles = is_quantile(algo) ? 32 : 1;
  cfg.cql_alpha = is_conservative(algo) ? 1.0 : 0.0;
  return cfg;
}

void validate(const AgentConfig& cfg) {
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) throw InvalidArgument("agent: gamma must be in [0, 1)");
  if (cfg.num_quantiles < 1) throw InvalidArgument("agent: num_quantiles must be >= 1");
  if (!is_quantile(cfg.algo) && cfg.num_quantiles != 1) {
    throw InvalidArgument("agent: " + to_string(cfg.algo) + " is a scalar algorithm and needs num_quantiles = 1");
  }
  if (cfg.cql_alpha < 0.0) throw InvalidArgument("agent: cql_alpha must be >= 0");
  if (!is_conservative(cfg.algo) && cfg.cql_alpha != 0.0) {
    throw InvalidArgument("agent: " + to_string(cfg.algo) + " has no conservative penalty; cql_alpha must be 0");
  }
  if (!(cfg.kappa > 0.0)) throw InvalidArgument("agent: kappa must be positive");
  if (cfg.target_sync_every < 1) throw InvalidArgument("agent: target_sync_every must be >= 1");
  if (cfg.batch_size < 1) throw InvalidArgument("agent: batch_size must be >= 1");
  if (!(cfg.lr > 0.0)) throw InvalidArgument("agent: lr must be positive");
  for (int h : cfg.hidden_sizes) {
    if (h < 1) throw InvalidArgument("agent: hidden sizes must be positive");
  }
  const auto& e = cfg.epsilon;
  if (!(e.start >= 0 && e.start <= 1 && e.end >= 0 && e.end <= 1) || e.decay_episodes < 0) {
    throw InvalidArgument("agent: epsilon schedule values must lie in [0, 1]");
  }
}

namespace {

std::vector<int> layer_sizes(const AgentConfig& cfg, int obs_dim, int action_count) {
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  sizes.push_back(action_count * cfg.num_quantiles);
  return sizes;
}

nn::Matrix stack_states(const Batch& batch, int obs_dim, bool next) {
  nn::Matrix m(obs_dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& v = next ? batch[b].next_state : batch[b].state;
    if (static_cast<int>(v.size()) != obs_dim) {
      throw DimensionError(next ? "batch next_state" : "batch state", static_cast<std::size_t>(obs_dim), v.size());
    }
    for (int i = 0; i < obs_dim; ++i) m(i, static_cast<Eigen::Index>(b)) = v[static_cast<std::size_t>(i)];
  }
  return m;
}

}  // namespace

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double logsumexp(std::span<const double> values) {
  const double m = *std::max_element(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double cvar(std::span<const double> values, double level) {
  if (values.empty()) throw InvalidArgument("cvar of an empty quantile set");
  if (!(level > 0.0 && level <= 1.0)) throw InvalidArgument("cvar level must be in (0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto k = static_cast<std::size_t>(
      std::max(1.0, std::ceil(level * static_cast<double>(sorted.size()) - 1e-9)));
  return std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
         static_cast<double>(k);
}

QAgent::QAgent(AgentConfig cfg, int obs_dim, int action_count, Rng& init_rng)
    : QAgent(cfg, obs_dim, action_count,
             nn::make_he_uniform_mlp(layer_sizes(cfg, obs_dim, action_count), init_rng)) {}

QAgent::QAgent(AgentConfig cfg, int obs_dim, int action_count, nn::Mlp online)
    : cfg_(std::move(cfg)), obs_dim_(obs_dim), action_count_(action_count) {
  validate(cfg_);
  if (obs_dim < 1 || action_count < 1) throw InvalidArgument("agent: dims must be positive");
  const auto sizes = layer_sizes(cfg_, obs_dim, action_count);
  if (online.layer_sizes != sizes) {
    throw MismatchError("agent: network shape does not match obs_dim / action_count x quantiles / hidden sizes");
  }
  nn::validate(online);
  online_ = std::move(online);
  target_ = online_;
  opt_ = nn::make_adam(online_, nn::AdamHyper{cfg_.lr});
  taus_ = quantile_midpoints(cfg_.num_quantiles);
}

std::vector<double> QAgent::q_values(std::span<const double> obs) const {
  const nn::Vector out = nn::forward(online_, obs);
  const int n = cfg_.num_quantiles;
  std::vector<double> q(static_cast<std::size_t>(action_count_));
  for (int a = 0; a < action_count_; ++a) {
    if (n == 1) {
      q[a] = out(a);
    } else {
      q[a] = out.segment(a * n, n).mean();
    }
  }
  return q;
}

std::vector<double> QAgent::quantiles(std::span<const double> obs, int action) const {
  if (action < 0 || action >= action_count_) throw InvalidArgument("agent: action out of range");
  const nn::Vector out = nn::forward(online_, obs);
  const int n = cfg_.num_quantiles;
  return {out.data() + action * n, out.data() + (action + 1) * n};
}

int QAgent::greedy_action(std::span<const double> obs) const { return argmax_lowest(q_values(obs)); }

int QAgent::select_action(std::span<const double> obs, double epsilon, Rng& rng) const {
  if (epsilon > 0.0 && rng.uniform() < epsilon) return rng.index(action_count_);
  return greedy_action(obs);
}

struct QAgent::Terms {
  double td = 0.0;
  double penalty = 0.0;
  nn::Matrix upstream;
  nn::BatchTrace trace;
};

QAgent::Terms QAgent::compute(const Batch& batch, bool want_td, bool want_penalty) const {
  if (batch.empty()) throw InvalidArgument("agent: empty batch");
  const auto bsz = static_cast<Eigen::Index>(batch.size());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const int n = cfg_.num_quantiles;
  for (const Transition& t : batch) {
    if (t.action < 0 || t.action >= action_count_) throw InvalidArgument("agent: batch action out of range");
  }

  Terms terms;
  const nn::Matrix out = nn::forward_batch(online_, stack_states(batch, obs_dim_, false), &terms.trace);
  terms.upstream = nn::Matrix::Zero(out.rows(), bsz);

  if (want_td) {
    const nn::Matrix next = nn::forward_batch(target_, stack_states(batch, obs_dim_, true));
    std::vector<double> next_mean(static_cast<std::size_t>(action_count_));
    std::vector<double> target(static_cast<std::size_t>(n));
    std::vector<double> pred(static_cast<std::size_t>(n));
    for (Eigen::Index b = 0; b < bsz; ++b) {
      const Transition& t = batch[static_cast<std::size_t>(b)];
      for (int a = 0; a < action_count_; ++a) {
        next_mean[a] = n == 1 ? next(a, b) : next.col(b).segment(a * n, n).mean();
      }
      const int best = argmax_lowest(next_mean);
      const double cont = t.done ? 0.0 : cfg_.gamma;
      if (!is_quantile(cfg_.algo)) {
        const double y = t.reward + cont * next(best, b);
        const double u = y - out(t.action, b);
        terms.td += huber(u, cfg_.kappa);
        terms.upstream(t.action, b) -= huber_derivative(u, cfg_.kappa) * inv_b;
      } else {
        for (int i = 0; i < n; ++i) {
          target[i] = t.reward + cont * next(best * n + i, b);
          pred[i] = out(t.action * n + i, b);
        }
        const QuantileLoss ql = quantile_huber_loss_with_grad(pred, target, taus_, cfg_.kappa);
        terms.td += ql.loss;
        for (int i = 0; i < n; ++i) terms.upstream(t.action * n + i, b) += ql.grad_pred[i] * inv_b;
      }
    }
    terms.td *= inv_b;
  }

  if (want_penalty) {
    const double alpha = cfg_.cql_alpha;
    std::vector<double> qbar(static_cast<std::size_t>(action_count_));
    for (Eigen::Index b = 0; b < bsz; ++b) {
      const Transition& t = batch[static_cast<std::size_t>(b)];
      for (int a = 0; a < action_count_; ++a) {
        qbar[a] = n == 1 ? out(a, b) : out.col(b).segment(a * n, n).mean();
      }
      const double lse = logsumexp(qbar);
      terms.penalty += lse - qbar[t.action];
      for (int a = 0; a < action_count_; ++a) {
        const double dq = std::exp(qbar[a] - lse) - (a == t.action ? 1.0 : 0.0);
        const double g = alpha * inv_b * dq / n;
        for (int i = 0; i < n; ++i) terms.upstream(a * n + i, b) += g;
      }
    }
    terms.penalty *= alpha * inv_b;
  }
  return terms;
}

LossAndGrad QAgent::td_loss_scalar(const Batch& batch) const {
  if (is_quantile(cfg_.algo)) throw InvalidArgument("agent: td_loss_scalar needs a scalar algorithm");
  Terms t = compute(batch, true, false);
  return {t.td, nn::backward_batch(online_, t.trace, t.upstream)};
}

LossAndGrad QAgent::td_loss_quantile(const Batch& batch) const {
  if (!is_quantile(cfg_.algo)) throw InvalidArgument("agent: td_loss_quantile needs a quantile algorithm");
  Terms t = compute(batch, true, false);
  return {t.td, nn::backward_batch(online_, t.trace, t.upstream)};
}

LossAndGrad QAgent::cql_penalty(const Batch& batch) const {
  if (!is_conservative(cfg_.algo)) throw InvalidArgument("agent: cql_penalty needs cql or cqr");
  Terms t = compute(batch, false, true);
  return {t.penalty, nn::backward_batch(online_, t.trace, t.upstream)};
}

QAgent::Losses QAgent::losses(const Batch& batch) const {
  Terms t = compute(batch, true, is_conservative(cfg_.algo));
  return {t.td, t.penalty};
}

double QAgent::train_step(const Batch& batch) {
  Terms t = compute(batch, true, is_conservative(cfg_.algo));
  const nn::GradBundle grads = nn::backward_batch(online_, t.trace, t.upstream);
  nn::adam_step(online_, grads, opt_);
  ++steps_;
  if (steps_ % cfg_.target_sync_every == 0) sync_target();
  return t.td + t.penalty;
}

}  // namespace cqrlab
