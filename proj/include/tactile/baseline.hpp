#pragma once

#include <stdexcept>
#include <vector>

#include "tactile/features.hpp"
#include "tactile/taxel.hpp"

namespace tactile {

struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PcaModel {
  int dim = 0;  // input dimension
  int q = 0;    // retained components (may be reduced when rank-deficient)
  std::vector<double> mean;                // dim
  std::vector<double> components;          // q * dim row-major, orthonormal
  std::vector<double> explained_variance;  // q, descending
};

// Principal directions by descending variance; the largest-magnitude entry of
// each component is kept positive. Rank deficiency reduces q with a warning
// on stderr.
PcaModel pca_fit(const std::vector<std::vector<double>>& vectors, int q);

std::vector<double> pca_project(const PcaModel& model, const std::vector<double>& x);
std::vector<double> pca_reconstruct(const PcaModel& model, const std::vector<double>& z);

struct LabeledPoint {
  std::vector<double> x;
  Category label;
};

// Euclidean k-NN; majority vote, ties by smallest mean distance then the
// fixed category order.
Category knn_classify(const std::vector<LabeledPoint>& train, const std::vector<double>& probe,
                      int k = 1);

enum class Channel { FMax, Area, Motion };

// Concatenation of the selected channels in order; every channel must have
// exactly expected_len samples.
std::vector<double> vectorize(const FeatureSeries& fs, const std::vector<Channel>& channels,
                              int expected_len = 120);

}  // namespace tactile
