// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "csifb/types.hpp"

namespace csifb {

struct SimilarityReport {
  double rho = 0.0;
  std::vector<double> per_subband;
  int n_samples = 0;
};

/// |v_hat^H v| / (||v_hat|| ||v||).
double cosine_similarity(const CVec& v, const CVec& v_hat);

/// Mean column-wise cosine similarity; per_subband holds each column's value.
SimilarityReport stacked_cosine_similarity(const CMat& v_stack, const CMat& v_stack_hat);

/// -mean similarity over the batch.
double loss_single(std::span<const CVec> v, std::span<const CVec> v_hat);
/// -mean over the batch and over columns.
double loss_multi(std::span<const CMat> v, std::span<const CMat> v_hat);

/// Accumulates per-sample stacked similarities into a dataset-level report
/// (rho = mean over samples, per_subband = mean per column).
class SimilarityAccumulator {
 public:
  void add(const CMat& v_stack, const CMat& v_stack_hat);
  SimilarityReport report() const;
  const std::vector<double>& per_sample() const noexcept { return per_sample_; }

 private:
  std::vector<double> per_sample_;
  std::vector<double> column_sums_;
};

// Real [Re; Im] parameterization used by the neural models. A sample of
// nt x ns complex entries is laid out as [Re(vec V); Im(vec V)] with vec
// stacking columns.

/// Complex matrix from a real [Re; Im] vector.
CMat unpack_real(std::span<const double> x, int nt, int ns);
/// Real [Re; Im] vector of a complex matrix.
RVec pack_real(const CMat& v);

/// Per-sample cosine loss and its gradient: value = -(1/ns) sum_s rho_s
/// and grad_out (same layout as x_hat) = d value / d x_hat. A column whose
/// inner product vanishes contributes a zero subgradient; an all-zero
/// reconstructed column contributes 0 to the value and -v/(ns*||v||) to the
/// gradient.
double cosine_loss_and_grad(std::span<const double> x, std::span<const double> x_hat, int nt,
                            int ns, std::span<double> grad_out);

}  // namespace csifb
