#pragma once

#include <string>
#include <vector>

#include "parkcast/activation.hpp"
#include "parkcast/tape.hpp"
#include "parkcast/tensor.hpp"

namespace parkcast {

// Block-closeness graph: W_ij = 1 / travel time, symmetrized.
struct WeightedGraph {
    std::size_t n = 0;
    Tensor weights;                        // n x n, symmetric, zero diagonal
    std::vector<std::string> node_labels;  // optional block ids
};

// travel_time_seconds: n x n, positive off-diagonal (infinity = no direct
// closeness, weight 0); the diagonal is ignored. W_ij = 1/t_ij averaged with
// its transpose.
WeightedGraph build_weight_matrix(const Tensor& travel_time_seconds,
                                  std::vector<std::string> node_labels = {});

// L = I - D^{-1/2} W D^{-1/2}. Zero-degree nodes get degree 1e-8 and a
// warning instead of failing.
Tensor normalized_laplacian(const WeightedGraph& g, std::vector<std::string>* warnings = nullptr);

// Power iteration, stops at relative change < 1e-9 or 1000 iterations;
// result floored at 1e-6. Throws on non-symmetric input.
double estimate_lambda_max(const Tensor& laplacian);

enum class LambdaMaxMode {
    kPowerIteration,
    kUpperBound,  // analytic bound 2.0 for normalized Laplacians
};

struct ScaledLaplacian {
    Tensor laplacian;      // L
    double lambda_max = 0;
    Tensor scaled;         // L_tilde = 2L/lambda_max - I, spectrum in [-1, 1]
    std::vector<std::string> node_labels;
    std::vector<std::string> warnings;

    std::size_t n() const { return laplacian.rank() == 2 ? laplacian.rows() : 0; }
};

ScaledLaplacian scale_laplacian(const WeightedGraph& g,
                                LambdaMaxMode mode = LambdaMaxMode::kPowerIteration);

// Cyclic Jacobi eigensolver for small symmetric matrices (test oracle scale).
// Eigenvalues ascending; eigenvectors[:, i] pairs with eigenvalues[i].
void symmetric_eigen(const Tensor& a, Tensor& eigenvalues, Tensor& eigenvectors);

// y = sum_k T_k(L_tilde) x theta_k via the three-term vector recurrence
// z_0 = x, z_1 = L_tilde x, z_k = 2 L_tilde z_{k-1} - z_{k-2}; the T_k
// matrices are never formed. theta is rank-3 (K, D_in, D_out). x may stack
// several n-row signals vertically (rows = B*n).
Tensor chebyshev_filter(const ScaledLaplacian& sl, const Tensor& x, const Tensor& theta);

// Same filter through full eigendecomposition, U g(Lambda) U^T x with
// g = sum_k theta_k T_k(Lambda_tilde). Small-n test oracle; kept independent
// of chebyshev_filter on purpose.
Tensor spectral_filter_direct(const ScaledLaplacian& sl, const Tensor& x, const Tensor& theta);

// Tape ops. sl must outlive the tape. x rows must be a multiple of sl.n().
Value cheb_filter_op(Tape& tape, Value x, const ScaledLaplacian& sl, Value theta);
Value gcnn_layer(Tape& tape, Value x, const ScaledLaplacian& sl, Value theta, Value bias,
                 Activation act);

// Hop distances from node v in the weighted adjacency (edges where W > 0);
// unreachable nodes get SIZE_MAX. Used by locality checks.
std::vector<std::size_t> hop_distances(const Tensor& weights, std::size_t v);

} // namespace parkcast
