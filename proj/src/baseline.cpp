#include "tactile/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace tactile {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Fine for the
// few-hundred-dimensional covariances this project sees.
void jacobi_eigen(std::vector<double>& a, int n, std::vector<double>& eigvec) {
  eigvec.assign(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) eigvec[size_t(i) * n + i] = 1.0;
  auto at = [&](int r, int c) -> double& { return a[size_t(r) * n + c]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        (i == j ? diag : off) += a[size_t(i) * n + j] * a[size_t(i) * n + j];
    if (off <= 1e-24 * std::max(diag, 1e-300)) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double tt = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tt * tt + 1.0);
        const double s = tt * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = eigvec[size_t(k) * n + p], vkq = eigvec[size_t(k) * n + q];
          eigvec[size_t(k) * n + p] = c * vkp - s * vkq;
          eigvec[size_t(k) * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
}

}  // namespace

PcaModel pca_fit(const std::vector<std::vector<double>>& vectors, int q) {
  if (q < 1) throw std::invalid_argument("pca_fit: q must be >= 1");
  if (vectors.size() < size_t(q) + 1)
    throw std::invalid_argument("pca_fit: need at least q+1 vectors");
  const int dim = int(vectors.front().size());
  if (q > dim) throw std::invalid_argument("pca_fit: q exceeds input dimension");
  for (const auto& v : vectors)
    if (int(v.size()) != dim) throw LengthMismatch("pca_fit: unequal vector lengths");

  PcaModel model;
  model.dim = dim;
  model.mean.assign(dim, 0.0);
  for (const auto& v : vectors)
    for (int i = 0; i < dim; ++i) model.mean[i] += v[i];
  for (double& m : model.mean) m /= double(vectors.size());

  std::vector<double> cov(size_t(dim) * dim, 0.0);
  for (const auto& v : vectors)
    for (int i = 0; i < dim; ++i) {
      const double di = v[i] - model.mean[i];
      for (int j = i; j < dim; ++j)
        cov[size_t(i) * dim + j] += di * (v[j] - model.mean[j]);
    }
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      cov[size_t(i) * dim + j] /= double(vectors.size());
      cov[size_t(j) * dim + i] = cov[size_t(i) * dim + j];
    }

  std::vector<double> eigvec;
  jacobi_eigen(cov, dim, eigvec);
  std::vector<std::pair<double, int>> order(dim);
  double max_eig = 0.0;
  for (int i = 0; i < dim; ++i) {
    order[i] = {cov[size_t(i) * dim + i], i};
    max_eig = std::max(max_eig, order[i].first);
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  int rank = 0;
  for (const auto& [val, idx] : order)
    if (val > std::max(1e-12 * max_eig, 1e-300)) ++rank;
  if (rank < q) {
    std::cerr << "pca_fit: rank-deficient input, reducing q from " << q << " to " << rank
              << "\n";
    q = std::max(rank, 1);
  }

  model.q = q;
  model.components.resize(size_t(q) * dim);
  model.explained_variance.resize(q);
  for (int k = 0; k < q; ++k) {
    const int col = order[k].second;
    model.explained_variance[k] = std::max(order[k].first, 0.0);
    double* comp = model.components.data() + size_t(k) * dim;
    for (int i = 0; i < dim; ++i) comp[i] = eigvec[size_t(i) * dim + col];
    // sign convention: make the largest-magnitude entry positive
    int arg = 0;
    for (int i = 1; i < dim; ++i)
      if (std::abs(comp[i]) > std::abs(comp[arg])) arg = i;
    if (comp[arg] < 0.0)
      for (int i = 0; i < dim; ++i) comp[i] = -comp[i];
  }
  return model;
}

std::vector<double> pca_project(const PcaModel& model, const std::vector<double>& x) {
  if (int(x.size()) != model.dim) throw LengthMismatch("pca_project: dimension mismatch");
  std::vector<double> z(model.q, 0.0);
  for (int k = 0; k < model.q; ++k) {
    const double* comp = model.components.data() + size_t(k) * model.dim;
    for (int i = 0; i < model.dim; ++i) z[k] += comp[i] * (x[i] - model.mean[i]);
  }
  return z;
}

std::vector<double> pca_reconstruct(const PcaModel& model, const std::vector<double>& z) {
  if (int(z.size()) != model.q) throw LengthMismatch("pca_reconstruct: dimension mismatch");
  std::vector<double> x = model.mean;
  for (int k = 0; k < model.q; ++k) {
    const double* comp = model.components.data() + size_t(k) * model.dim;
    for (int i = 0; i < model.dim; ++i) x[i] += z[k] * comp[i];
  }
  return x;
}

Category knn_classify(const std::vector<LabeledPoint>& train, const std::vector<double>& probe,
                      int k) {
  if (train.empty()) throw std::invalid_argument("knn_classify: empty training set");
  if (k < 1) throw std::invalid_argument("knn_classify: k must be >= 1");

  struct Cand {
    double dist;
    int label;
    size_t idx;
  };
  std::vector<Cand> cands;
  cands.reserve(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    if (train[i].x.size() != probe.size())
      throw LengthMismatch("knn_classify: dimension mismatch");
    double d2 = 0.0;
    for (size_t j = 0; j < probe.size(); ++j) {
      const double d = train[i].x[j] - probe[j];
      d2 += d * d;
    }
    cands.push_back({std::sqrt(d2), int(train[i].label), i});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.label != b.label) return a.label < b.label;
    return a.idx < b.idx;
  });
  const size_t kk = std::min(size_t(k), cands.size());

  int votes[kNumCategories] = {};
  double dist_sum[kNumCategories] = {};
  for (size_t i = 0; i < kk; ++i) {
    votes[cands[i].label] += 1;
    dist_sum[cands[i].label] += cands[i].dist;
  }
  int best = -1;
  for (int c = 0; c < kNumCategories; ++c) {
    if (votes[c] == 0) continue;
    if (best < 0) {
      best = c;
      continue;
    }
    const double mean_c = dist_sum[c] / votes[c];
    const double mean_b = dist_sum[best] / votes[best];
    if (votes[c] > votes[best] || (votes[c] == votes[best] && mean_c < mean_b)) best = c;
  }
  return Category(best);
}

std::vector<double> vectorize(const FeatureSeries& fs, const std::vector<Channel>& channels,
                              int expected_len) {
  if (channels.empty()) throw std::invalid_argument("vectorize: no channels selected");
  std::vector<double> out;
  out.reserve(size_t(expected_len) * channels.size());
  for (Channel ch : channels) {
    const std::vector<double>* src = nullptr;
    switch (ch) {
      case Channel::FMax: src = &fs.f_max; break;
      case Channel::Area: src = &fs.area; break;
      case Channel::Motion: src = &fs.d; break;
    }
    if (int(src->size()) != expected_len)
      throw LengthMismatch("vectorize: channel length " + std::to_string(src->size()) +
                           " != expected " + std::to_string(expected_len));
    out.insert(out.end(), src->begin(), src->end());
  }
  return out;
}

}  // namespace tactile
