#include "tactile/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "tactile/util.hpp"

namespace tactile {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Symmetrize, floor the diagonal, and keep 2x2 correlations away from +/-1 so
// every state stays positive definite.
void repair_covariance(std::vector<double>& cov, int dim, double floor) {
  if (dim == 1) {
    cov[0] = std::max(cov[0], floor);
    return;
  }
  cov[1] = cov[2] = 0.5 * (cov[1] + cov[2]);
  cov[0] = std::max(cov[0], floor);
  cov[3] = std::max(cov[3], floor);
  const double limit = 0.999 * std::sqrt(cov[0] * cov[3]);
  cov[1] = std::clamp(cov[1], -limit, limit);
  cov[2] = cov[1];
}

// Cached per-state inverse covariance and normalization constants.
struct EmissionTable {
  int dim;
  std::vector<double> inv;       // n_states * dim*dim
  std::vector<double> log_norm;  // n_states
  const GaussianHmm* model;

  explicit EmissionTable(const GaussianHmm& m) : dim(m.dim), model(&m) {
    const int dd = dim * dim;
    inv.resize(size_t(m.n_states) * dd);
    log_norm.resize(m.n_states);
    for (int j = 0; j < m.n_states; ++j) {
      const auto& cov = m.states[j].cov;
      double* iv = inv.data() + size_t(j) * dd;
      if (dim == 1) {
        if (cov[0] <= 0.0) throw std::invalid_argument("non-positive variance in state");
        iv[0] = 1.0 / cov[0];
        log_norm[j] = -0.5 * (kLog2Pi + std::log(cov[0]));
      } else {
        const double det = cov[0] * cov[3] - cov[1] * cov[2];
        if (det <= 0.0) throw std::invalid_argument("singular covariance in state");
        iv[0] = cov[3] / det;
        iv[1] = -cov[1] / det;
        iv[2] = -cov[2] / det;
        iv[3] = cov[0] / det;
        log_norm[j] = -kLog2Pi - 0.5 * std::log(det);
      }
    }
  }

  double logb(int j, const double* x) const {
    const auto& mu = model->states[j].mean;
    const double* iv = inv.data() + size_t(j) * dim * dim;
    if (dim == 1) {
      const double dx = x[0] - mu[0];
      return log_norm[j] - 0.5 * dx * dx * iv[0];
    }
    const double dx = x[0] - mu[0], dy = x[1] - mu[1];
    const double q = dx * (iv[0] * dx + iv[1] * dy) + dy * (iv[2] * dx + iv[3] * dy);
    return log_norm[j] - 0.5 * q;
  }
};

std::vector<double> log_transitions(const GaussianHmm& m) {
  std::vector<double> la(m.transitions.size());
  for (size_t i = 0; i < la.size(); ++i)
    la[i] = m.transitions[i] > 0.0 ? std::log(m.transitions[i]) : kNegInf;
  return la;
}

double logsumexp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v)
    if (x != kNegInf) s += std::exp(x - m);
  return m + std::log(s);
}

// Sufficient statistics accumulated over the training set during one E-step.
struct EmStats {
  std::vector<double> trans_num;  // N*N
  std::vector<double> trans_den;  // N
  std::vector<double> pi_acc;     // N
  std::vector<double> w;          // N
  std::vector<double> wx;         // N*dim
  std::vector<double> wxx;        // N*dim*dim
  double loglik = 0.0;
  int n_sequences = 0;

  EmStats(int n, int dim)
      : trans_num(size_t(n) * n, 0.0),
        trans_den(n, 0.0),
        pi_acc(n, 0.0),
        w(n, 0.0),
        wx(size_t(n) * dim, 0.0),
        wxx(size_t(n) * dim * dim, 0.0) {}
};

inline double logsumexp2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Log-space banded forward-backward for left-right models. The band (self +
// advance) keeps it O(T*N), and log arithmetic survives the huge dynamic
// range terminal scoring creates at high state counts.
void accumulate_left_right(const GaussianHmm& m, const EmissionTable& em,
                           const ObsSequence& seq, EmStats& stats) {
  const int N = m.n_states, T = seq.length(), dim = m.dim;
  std::vector<double> logb(size_t(T) * N);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < N; ++j) logb[size_t(t) * N + j] = em.logb(j, seq.frame(t));

  std::vector<double> la_self(N), la_adv(N, kNegInf);
  for (int j = 0; j < N; ++j) {
    la_self[j] = m.a(j, j) > 0.0 ? std::log(m.a(j, j)) : kNegInf;
    if (j + 1 < N) la_adv[j] = m.a(j, j + 1) > 0.0 ? std::log(m.a(j, j + 1)) : kNegInf;
  }

  std::vector<double> lalpha(size_t(T) * N, kNegInf), lbeta(size_t(T) * N, kNegInf);
  for (int j = 0; j < N; ++j)
    lalpha[j] = (m.initial[j] > 0.0 ? std::log(m.initial[j]) : kNegInf) + logb[j];
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < N; ++j) {
      const double stay = lalpha[size_t(t - 1) * N + j] + la_self[j];
      const double advance =
          j > 0 ? lalpha[size_t(t - 1) * N + j - 1] + la_adv[j - 1] : kNegInf;
      lalpha[size_t(t) * N + j] = logsumexp2(stay, advance) + logb[size_t(t) * N + j];
    }
  }
  for (int j = 0; j < N; ++j)
    lbeta[size_t(T - 1) * N + j] = m.terminal && j != N - 1 ? kNegInf : 0.0;
  for (int t = T - 2; t >= 0; --t) {
    for (int i = 0; i < N; ++i) {
      const double stay =
          la_self[i] + logb[size_t(t + 1) * N + i] + lbeta[size_t(t + 1) * N + i];
      const double advance = i + 1 < N ? la_adv[i] + logb[size_t(t + 1) * N + i + 1] +
                                             lbeta[size_t(t + 1) * N + i + 1]
                                       : kNegInf;
      lbeta[size_t(t) * N + i] = logsumexp2(stay, advance);
    }
  }

  double ll = kNegInf;
  for (int j = 0; j < N; ++j)
    ll = logsumexp2(ll, lalpha[size_t(T - 1) * N + j] + lbeta[size_t(T - 1) * N + j]);
  if (ll == kNegInf)
    throw std::logic_error("terminal scoring: no path reaches the final state");

  for (int t = 0; t < T; ++t) {
    const double* x = seq.frame(t);
    for (int j = 0; j < N; ++j) {
      const double lg = lalpha[size_t(t) * N + j] + lbeta[size_t(t) * N + j] - ll;
      if (lg == kNegInf) continue;
      const double g = std::exp(lg);
      if (t == 0) stats.pi_acc[j] += g;
      if (t < T - 1) stats.trans_den[j] += g;
      stats.w[j] += g;
      for (int u = 0; u < dim; ++u) {
        stats.wx[size_t(j) * dim + u] += g * x[u];
        for (int v = 0; v < dim; ++v)
          stats.wxx[(size_t(j) * dim + u) * dim + v] += g * x[u] * x[v];
      }
    }
    if (t < T - 1) {
      for (int i = 0; i < N; ++i) {
        const double lai = lalpha[size_t(t) * N + i];
        if (lai == kNegInf) continue;
        const double stay =
            lai + la_self[i] + logb[size_t(t + 1) * N + i] + lbeta[size_t(t + 1) * N + i] - ll;
        if (stay != kNegInf) stats.trans_num[size_t(i) * N + i] += std::exp(stay);
        if (i + 1 < N) {
          const double advance = lai + la_adv[i] + logb[size_t(t + 1) * N + i + 1] +
                                 lbeta[size_t(t + 1) * N + i + 1] - ll;
          if (advance != kNegInf)
            stats.trans_num[size_t(i) * N + i + 1] += std::exp(advance);
        }
      }
    }
  }
  stats.loglik += ll;
  stats.n_sequences += 1;
}

// Scaled forward-backward on one sequence; emissions are shifted by their
// per-step maximum so the scaling never underflows on healthy models.
void accumulate_sequence(const GaussianHmm& m, const EmissionTable& em,
                         const ObsSequence& seq, EmStats& stats) {
  const int N = m.n_states, T = seq.length(), dim = m.dim;
  std::vector<double> logb(size_t(T) * N), shift(T);
  for (int t = 0; t < T; ++t) {
    double mx = kNegInf;
    for (int j = 0; j < N; ++j) {
      const double v = em.logb(j, seq.frame(t));
      logb[size_t(t) * N + j] = v;
      mx = std::max(mx, v);
    }
    shift[t] = mx;
  }
  std::vector<double> eb(size_t(T) * N);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < N; ++j)
      eb[size_t(t) * N + j] = std::exp(logb[size_t(t) * N + j] - shift[t]);

  std::vector<double> alpha(size_t(T) * N), beta(size_t(T) * N), scale(T);
  double ll = 0.0;
  for (int j = 0; j < N; ++j) alpha[j] = m.initial[j] * eb[j];
  for (int t = 0; t < T; ++t) {
    if (t > 0) {
      for (int j = 0; j < N; ++j) {
        double s = 0.0;
        for (int i = 0; i < N; ++i) s += alpha[size_t(t - 1) * N + i] * m.a(i, j);
        alpha[size_t(t) * N + j] = s * eb[size_t(t) * N + j];
      }
    }
    double c = 0.0;
    for (int j = 0; j < N; ++j) c += alpha[size_t(t) * N + j];
    if (!(c > 0.0))
      throw std::logic_error("forward scaling underflow: model cannot explain sequence");
    scale[t] = c;
    for (int j = 0; j < N; ++j) alpha[size_t(t) * N + j] /= c;
    ll += std::log(c) + shift[t];
  }
  for (int j = 0; j < N; ++j)
    beta[size_t(T - 1) * N + j] = m.terminal && j != N - 1 ? 0.0 : 1.0;
  for (int t = T - 2; t >= 0; --t) {
    for (int i = 0; i < N; ++i) {
      double s = 0.0;
      for (int j = 0; j < N; ++j)
        s += m.a(i, j) * eb[size_t(t + 1) * N + j] * beta[size_t(t + 1) * N + j];
      beta[size_t(t) * N + i] = s / scale[t + 1];
    }
  }

  // sum_i alpha^(t,i) beta^(t,i) is t-independent: 1 for open-ended scoring,
  // the terminal-path fraction otherwise
  double z = 0.0;
  for (int j = 0; j < N; ++j) z += alpha[size_t(T - 1) * N + j] * beta[size_t(T - 1) * N + j];
  if (!(z > 0.0))
    throw std::logic_error("terminal scoring: no path reaches the final state");
  ll += std::log(z);

  for (int t = 0; t < T; ++t) {
    const double* x = seq.frame(t);
    for (int j = 0; j < N; ++j) {
      const double g = alpha[size_t(t) * N + j] * beta[size_t(t) * N + j] / z;
      if (t == 0) stats.pi_acc[j] += g;
      if (t < T - 1) stats.trans_den[j] += g;
      stats.w[j] += g;
      for (int u = 0; u < dim; ++u) {
        stats.wx[size_t(j) * dim + u] += g * x[u];
        for (int v = 0; v < dim; ++v)
          stats.wxx[(size_t(j) * dim + u) * dim + v] += g * x[u] * x[v];
      }
    }
    if (t < T - 1) {
      for (int i = 0; i < N; ++i) {
        const double ai = alpha[size_t(t) * N + i];
        if (ai == 0.0) continue;
        for (int j = 0; j < N; ++j) {
          const double aij = m.a(i, j);
          if (aij == 0.0) continue;
          stats.trans_num[size_t(i) * N + j] += ai * aij * eb[size_t(t + 1) * N + j] *
                                                beta[size_t(t + 1) * N + j] /
                                                (scale[t + 1] * z);
        }
      }
    }
  }
  stats.loglik += ll;
  stats.n_sequences += 1;
}

EmStats e_step(const GaussianHmm& m, const std::vector<ObsSequence>& training) {
  EmissionTable em(m);
  EmStats stats(m.n_states, m.dim);
  for (const ObsSequence& seq : training) {
    if (m.left_right)
      accumulate_left_right(m, em, seq, stats);
    else
      accumulate_sequence(m, em, seq, stats);
  }
  return stats;
}

GaussianHmm m_step(const GaussianHmm& model, const EmStats& stats, const TrainConfig& cfg) {
  GaussianHmm next = model;
  const int N = model.n_states, dim = model.dim;
  for (int i = 0; i < N; ++i) {
    if (stats.trans_den[i] <= 1e-300) continue;  // state never left; keep row
    double row = 0.0;
    for (int j = 0; j < N; ++j) row += stats.trans_num[size_t(i) * N + j];
    if (row <= 0.0) continue;
    for (int j = 0; j < N; ++j) next.a(i, j) = stats.trans_num[size_t(i) * N + j] / row;
  }
  for (int j = 0; j < N; ++j)
    next.initial[j] = stats.pi_acc[j] / double(stats.n_sequences);
  for (int j = 0; j < N; ++j) {
    if (stats.w[j] <= 1e-12) continue;  // unoccupied state; keep emission
    auto& st = next.states[j];
    for (int u = 0; u < dim; ++u) st.mean[u] = stats.wx[size_t(j) * dim + u] / stats.w[j];
    for (int u = 0; u < dim; ++u)
      for (int v = 0; v < dim; ++v)
        st.cov[size_t(u) * dim + v] =
            stats.wxx[(size_t(j) * dim + u) * dim + v] / stats.w[j] - st.mean[u] * st.mean[v];
    if (!cfg.full_covariance && dim == 2) st.cov[1] = st.cov[2] = 0.0;
    repair_covariance(st.cov, dim, cfg.variance_floor);
  }
  return next;
}

}  // namespace

void GaussianHmm::validate() const {
  if (n_states < 1) throw std::invalid_argument("GaussianHmm: need at least one state");
  if (dim != 1 && dim != 2) throw std::invalid_argument("GaussianHmm: dim must be 1 or 2");
  if (initial.size() != size_t(n_states) ||
      transitions.size() != size_t(n_states) * n_states ||
      states.size() != size_t(n_states))
    throw std::invalid_argument("GaussianHmm: inconsistent sizes");
  for (int i = 0; i < n_states; ++i) {
    double row = 0.0;
    for (int j = 0; j < n_states; ++j) {
      if (a(i, j) < 0.0) throw std::invalid_argument("GaussianHmm: negative transition");
      row += a(i, j);
    }
    if (std::abs(row - 1.0) > 1e-9)
      throw std::invalid_argument("GaussianHmm: transition row does not sum to 1");
  }
  if (left_right) {
    for (int i = 0; i < n_states; ++i)
      for (int j = 0; j < n_states; ++j)
        if ((j < i || j > i + 1) && a(i, j) != 0.0)
          throw std::invalid_argument("GaussianHmm: left-right zero pattern violated");
    if (std::abs(a(n_states - 1, n_states - 1) - 1.0) > 1e-9)
      throw std::invalid_argument("GaussianHmm: last state must be absorbing");
    if (std::abs(initial[0] - 1.0) > 1e-9)
      throw std::invalid_argument("GaussianHmm: left-right initial distribution must be e_1");
  } else if (terminal) {
    throw std::invalid_argument("GaussianHmm: terminal scoring requires a left-right model");
  }
  for (const auto& st : states) {
    if (st.mean.size() != size_t(dim) || st.cov.size() != size_t(dim) * dim)
      throw std::invalid_argument("GaussianHmm: emission size mismatch");
    if (dim == 1) {
      if (st.cov[0] <= 0.0) throw std::invalid_argument("GaussianHmm: non-positive variance");
    } else {
      if (st.cov[0] <= 0.0 || st.cov[3] <= 0.0 ||
          st.cov[0] * st.cov[3] - st.cov[1] * st.cov[2] <= 0.0 ||
          std::abs(st.cov[1] - st.cov[2]) > 1e-9)
        throw std::invalid_argument("GaussianHmm: covariance not symmetric positive definite");
    }
  }
}

void TrainConfig::validate() const {
  if (n_states < 2) throw std::invalid_argument("TrainConfig: n_states must be >= 2");
  if (tolerance <= 0.0) throw std::invalid_argument("TrainConfig: tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("TrainConfig: max_iterations must be >= 1");
  if (variance_floor <= 0.0) throw std::invalid_argument("TrainConfig: variance floor must be > 0");
}

GaussianHmm init_left_right(const std::vector<ObsSequence>& training, const TrainConfig& cfg) {
  cfg.validate();
  if (training.size() < 2)
    throw std::invalid_argument("init_left_right: need at least 2 training sequences");
  const int dim = training.front().dim;
  const int N = cfg.n_states;
  int common_len = 0;
  for (const auto& seq : training) {
    if (seq.dim != dim)
      throw std::invalid_argument("init_left_right: mixed observation dimensions");
    if (seq.length() < N)
      throw TooShortSequence("init_left_right: sequence of length " +
                             std::to_string(seq.length()) + " shorter than " +
                             std::to_string(N) + " states");
    common_len = std::max(common_len, seq.length());
  }

  // pool part j of every (time-normalized) sequence
  std::vector<std::vector<double>> part_samples(N);  // flattened dim-vectors
  for (const auto& seq : training) {
    std::vector<std::vector<double>> channels(dim);
    for (int u = 0; u < dim; ++u) {
      std::vector<double> ch(seq.length());
      for (int t = 0; t < seq.length(); ++t) ch[t] = seq.frame(t)[u];
      channels[u] = int(ch.size()) == common_len ? ch : time_normalize(ch, common_len);
    }
    for (int j = 0; j < N; ++j) {
      const int start = j * common_len / N;
      const int end = (j + 1) * common_len / N;
      for (int t = start; t < end; ++t)
        for (int u = 0; u < dim; ++u) part_samples[j].push_back(channels[u][t]);
    }
  }

  GaussianHmm m;
  m.n_states = N;
  m.dim = dim;
  m.left_right = true;
  m.terminal = cfg.terminal;
  m.initial.assign(N, 0.0);
  m.initial[0] = 1.0;
  m.transitions.assign(size_t(N) * N, 0.0);
  for (int j = 0; j < N - 1; ++j) {
    m.a(j, j) = 0.5;
    m.a(j, j + 1) = 0.5;
  }
  m.a(N - 1, N - 1) = 1.0;

  m.states.resize(N);
  for (int j = 0; j < N; ++j) {
    const auto& flat = part_samples[j];
    const int n = int(flat.size()) / dim;
    auto& st = m.states[j];
    st.mean.assign(dim, 0.0);
    st.cov.assign(size_t(dim) * dim, 0.0);
    for (int t = 0; t < n; ++t)
      for (int u = 0; u < dim; ++u) st.mean[u] += flat[size_t(t) * dim + u];
    for (int u = 0; u < dim; ++u) st.mean[u] /= n;
    for (int t = 0; t < n; ++t)
      for (int u = 0; u < dim; ++u)
        for (int v = 0; v < dim; ++v)
          st.cov[size_t(u) * dim + v] += (flat[size_t(t) * dim + u] - st.mean[u]) *
                                         (flat[size_t(t) * dim + v] - st.mean[v]);
    for (double& c : st.cov) c /= n;
    if (!cfg.full_covariance && dim == 2) st.cov[1] = st.cov[2] = 0.0;
    repair_covariance(st.cov, dim, cfg.variance_floor);
  }
  m.validate();
  return m;
}

TrainResult baum_welch(const GaussianHmm& model, const std::vector<ObsSequence>& training,
                       const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (training.empty()) throw std::invalid_argument("baum_welch: empty training set");
  size_t n_obs = 0;
  for (const auto& seq : training) {
    if (seq.dim != model.dim)
      throw std::invalid_argument("baum_welch: sequence dimension does not match model");
    if (seq.length() < 1) throw std::invalid_argument("baum_welch: empty sequence");
    n_obs += size_t(seq.length());
  }

  TrainResult res;
  res.model = model;
  EmStats stats = e_step(res.model, training);
  res.loglik_trace.push_back(stats.loglik);

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    GaussianHmm cand = m_step(res.model, stats, cfg);
    EmStats cand_stats = e_step(cand, training);
    res.last_improvement = (cand_stats.loglik - stats.loglik) / double(n_obs);
    if (res.last_improvement < cfg.tolerance) {
      res.converged = true;
      break;
    }
    res.model = std::move(cand);
    stats = std::move(cand_stats);
    res.loglik_trace.push_back(stats.loglik);
    res.iterations = iter + 1;
  }
  return res;
}

ViterbiResult viterbi(const GaussianHmm& model, const ObsSequence& seq) {
  model.validate();
  const int N = model.n_states, T = seq.length();
  if (T < 1) throw std::invalid_argument("viterbi: empty sequence");
  if (seq.dim != model.dim) throw std::invalid_argument("viterbi: dimension mismatch");

  EmissionTable em(model);
  const std::vector<double> la = log_transitions(model);
  std::vector<double> delta(size_t(T) * N);
  std::vector<int> psi(size_t(T) * N, -1);
  for (int j = 0; j < N; ++j)
    delta[j] = (model.initial[j] > 0.0 ? std::log(model.initial[j]) : kNegInf) +
               em.logb(j, seq.frame(0));
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < N; ++j) {
      double best = kNegInf;
      int arg = -1;
      for (int i = 0; i < N; ++i) {
        const double v = delta[size_t(t - 1) * N + i] + la[size_t(i) * N + j];
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta[size_t(t) * N + j] = best + em.logb(j, seq.frame(t));
      psi[size_t(t) * N + j] = arg;
    }
  }
  int last = 0;
  double best = delta[size_t(T - 1) * N];
  if (model.terminal) {
    last = N - 1;
    best = delta[size_t(T - 1) * N + last];
  } else {
    for (int j = 1; j < N; ++j)
      if (delta[size_t(T - 1) * N + j] > best) {
        best = delta[size_t(T - 1) * N + j];
        last = j;
      }
  }
  ViterbiResult res;
  res.log_prob = best;
  res.path.assign(T, 0);
  res.path[T - 1] = last;
  for (int t = T - 1; t > 0; --t) {
    const int prev = psi[size_t(t) * N + res.path[t]];
    if (prev < 0) break;  // unreachable terminal state: score is already -inf
    res.path[t - 1] = prev;
  }
  return res;
}

double forward_loglik(const GaussianHmm& model, const ObsSequence& seq) {
  model.validate();
  const int N = model.n_states, T = seq.length();
  if (T < 1) throw std::invalid_argument("forward_loglik: empty sequence");
  if (seq.dim != model.dim) throw std::invalid_argument("forward_loglik: dimension mismatch");

  EmissionTable em(model);
  const std::vector<double> la = log_transitions(model);
  std::vector<double> cur(N), next(N), terms(N);
  for (int j = 0; j < N; ++j)
    cur[j] = (model.initial[j] > 0.0 ? std::log(model.initial[j]) : kNegInf) +
             em.logb(j, seq.frame(0));
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) terms[i] = cur[i] + la[size_t(i) * N + j];
      next[j] = logsumexp(terms) + em.logb(j, seq.frame(t));
    }
    std::swap(cur, next);
  }
  return model.terminal ? cur[N - 1] : logsumexp(cur);
}

// --- classifier banks ---

const char* to_string(FeatureSet fs) {
  switch (fs) {
    case FeatureSet::Force: return "force";
    case FeatureSet::Area: return "area";
    case FeatureSet::ForceMotion: return "force_motion";
  }
  return "?";
}

FeatureSet parse_feature_set(const std::string& token) {
  if (token == "force") return FeatureSet::Force;
  if (token == "area") return FeatureSet::Area;
  if (token == "force_motion") return FeatureSet::ForceMotion;
  throw FormatError("unknown feature set: '" + token + "'");
}

ObsSequence observation_sequence(const FeatureSeries& fs, FeatureSet set) {
  ObsSequence seq;
  switch (set) {
    case FeatureSet::Force:
      seq.dim = 1;
      seq.values = fs.f_max;
      break;
    case FeatureSet::Area:
      seq.dim = 1;
      seq.values = fs.area;
      break;
    case FeatureSet::ForceMotion: {
      seq.dim = 2;
      const ScaledSeries sf = scale_features(fs.f_max);
      const ScaledSeries sd = scale_features(fs.d);
      seq.values.reserve(sf.values.size() * 2);
      for (size_t i = 0; i < sf.values.size(); ++i) seq.push(sf.values[i], sd.values[i]);
      break;
    }
  }
  return seq;
}

bool HmmBank::complete(FeatureSet set) const {
  for (int c = 0; c < kNumCategories; ++c)
    if (!models.count({Category(c), set})) return false;
  return true;
}

HmmBank train_bank(const std::vector<FeatureSeries>& training, FeatureSet set,
                   const TrainConfig& cfg) {
  std::array<std::vector<ObsSequence>, kNumCategories> grouped;
  for (const FeatureSeries& fs : training) {
    if (!fs.label) throw std::invalid_argument("train_bank: unlabeled trial in training set");
    grouped[int(*fs.label)].push_back(observation_sequence(fs, set));
  }
  HmmBank bank;
  for (int c = 0; c < kNumCategories; ++c) {
    if (grouped[c].size() < 2)
      throw std::invalid_argument(std::string("train_bank: category ") +
                                  to_string(Category(c)) + " needs at least 2 trials");
    const GaussianHmm init = init_left_right(grouped[c], cfg);
    bank.models[{Category(c), set}] = baum_welch(init, grouped[c], cfg).model;
  }
  return bank;
}

Classification classify(const HmmBank& bank, const FeatureSeries& features, FeatureSet set) {
  if (!bank.complete(set))
    throw std::invalid_argument("classify: bank is missing models for this feature set");
  const ObsSequence seq = observation_sequence(features, set);
  Classification res;
  res.category = Category::RigidFixed;
  double best = kNegInf;
  for (int c = 0; c < kNumCategories; ++c) {
    const GaussianHmm& m = bank.models.at({Category(c), set});
    res.scores[c] = viterbi(m, seq).log_prob;
    if (res.scores[c] > best) {
      best = res.scores[c];
      res.category = Category(c);
    }
  }
  return res;
}

// --- serialization ---

void write_model(const GaussianHmm& model, const std::string& path) {
  model.validate();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for write: " + path);
  out << model.n_states << ',' << model.dim << ','
      << (model.left_right ? (model.terminal ? "left-right-terminal" : "left-right")
                           : "ergodic")
      << '\n';
  for (int j = 0; j < model.n_states; ++j) {
    if (j) out << ',';
    out << format_double(model.initial[j]);
  }
  out << '\n';
  for (int i = 0; i < model.n_states; ++i) {
    for (int j = 0; j < model.n_states; ++j) {
      if (j) out << ',';
      out << format_double(model.a(i, j));
    }
    out << '\n';
  }
  for (const auto& st : model.states) {
    bool first = true;
    for (double v : st.mean) {
      if (!first) out << ',';
      out << format_double(v);
      first = false;
    }
    for (double v : st.cov) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw FormatError("write failed: " + path);
}

GaussianHmm read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file: " + path);
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw FormatError("truncated model file: " + path);
    return split(trim(line), ',');
  };
  auto head = next_line();
  if (head.size() != 3) throw FormatError("model header needs 3 fields in " + path);
  GaussianHmm m;
  m.n_states = int(parse_double(head[0], "n_states"));
  m.dim = int(parse_double(head[1], "dim"));
  if (head[2] == "left-right") {
    m.left_right = true;
  } else if (head[2] == "left-right-terminal") {
    m.left_right = true;
    m.terminal = true;
  } else if (head[2] == "ergodic") {
    m.left_right = false;
  } else {
    throw FormatError("unknown topology token: '" + head[2] + "'");
  }

  auto pi = next_line();
  if (pi.size() != size_t(m.n_states)) throw FormatError("bad pi line in " + path);
  for (const auto& cell : pi) m.initial.push_back(parse_double(cell, "pi"));
  m.transitions.resize(size_t(m.n_states) * m.n_states);
  for (int i = 0; i < m.n_states; ++i) {
    auto row = next_line();
    if (row.size() != size_t(m.n_states)) throw FormatError("bad transition row in " + path);
    for (int j = 0; j < m.n_states; ++j) m.a(i, j) = parse_double(row[j], "transition");
  }
  for (int j = 0; j < m.n_states; ++j) {
    auto em = next_line();
    if (em.size() != size_t(m.dim) + size_t(m.dim) * m.dim)
      throw FormatError("bad emission line in " + path);
    GaussianState st;
    for (int u = 0; u < m.dim; ++u) st.mean.push_back(parse_double(em[u], "mean"));
    for (int u = 0; u < m.dim * m.dim; ++u)
      st.cov.push_back(parse_double(em[size_t(m.dim) + u], "covariance"));
    m.states.push_back(std::move(st));
  }
  m.validate();
  return m;
}

}  // namespace tactile
