#include "parkcast/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <numeric>

#include "parkcast/rng.hpp"

namespace parkcast {

namespace {

void require_square(const Tensor& t, const char* what) {
    if (t.rank() != 2 || t.rows() != t.cols()) {
        throw ShapeError(std::string(what) + ": expected square matrix, got " +
                         shape_str(t.shape()));
    }
}

void require_symmetric(const Tensor& t, const char* what) {
    require_square(t, what);
    const std::size_t n = t.rows();
    double scale = 0.0;
    for (double v : t.flat()) scale = std::max(scale, std::fabs(v));
    const double tol = 1e-10 * std::max(scale, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::fabs(t.at(i, j) - t.at(j, i)) > tol) {
                throw Error(std::string(what) + ": matrix is not symmetric at (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
}

// out_block (+)= alpha * L * x_block for every vertical n-row block of x.
void blocked_apply(const Tensor& l, const Tensor& x, Tensor& out, double alpha, bool accumulate) {
    const std::size_t n = l.rows();
    const std::size_t d = x.cols();
    const std::size_t blocks = x.rows() / n;
    if (!accumulate) std::fill(out.flat().begin(), out.flat().end(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        const double* xb = x.data() + b * n * d;
        double* ob = out.data() + b * n * d;
        for (std::size_t i = 0; i < n; ++i) {
            const double* lrow = l.data() + i * n;
            double* orow = ob + i * d;
            for (std::size_t k = 0; k < n; ++k) {
                const double w = alpha * lrow[k];
                if (w == 0.0) continue;
                const double* xrow = xb + k * d;
                for (std::size_t j = 0; j < d; ++j) orow[j] += w * xrow[j];
            }
        }
    }
}

Tensor theta_slice(const Tensor& theta, std::size_t k) {
    const std::size_t din = theta.dim(1), dout = theta.dim(2);
    Tensor out({din, dout});
    const double* src = theta.data() + k * din * dout;
    std::copy(src, src + din * dout, out.data());
    return out;
}

void check_filter_args(const ScaledLaplacian& sl, const Tensor& x, const Tensor& theta,
                       const char* what) {
    require_rank(x, 2, what);
    if (theta.rank() != 3) {
        throw ShapeError(std::string(what) + ": theta must be rank-3 (K, D_in, D_out), got " +
                         shape_str(theta.shape()));
    }
    const std::size_t n = sl.n();
    if (n == 0) throw ShapeError(std::string(what) + ": empty graph");
    if (x.rows() % n != 0) {
        throw ShapeError(std::string(what) + ": signal rows " + std::to_string(x.rows()) +
                         " not a multiple of graph size " + std::to_string(n));
    }
    if (x.cols() != theta.dim(1)) {
        throw ShapeError(std::string(what) + ": signal has " + std::to_string(x.cols()) +
                         " features but theta expects " + std::to_string(theta.dim(1)));
    }
    if (theta.dim(0) < 1) throw ShapeError(std::string(what) + ": K must be >= 1");
}

// z_k stack for x (shared by the forward op and the fused backward).
std::vector<Tensor> cheb_basis(const Tensor& l_tilde, const Tensor& x, std::size_t order) {
    std::vector<Tensor> z;
    z.reserve(order);
    z.push_back(x);
    if (order >= 2) {
        Tensor z1(x.shape());
        blocked_apply(l_tilde, x, z1, 1.0, false);
        z.push_back(std::move(z1));
    }
    for (std::size_t k = 2; k < order; ++k) {
        Tensor zk(x.shape());
        blocked_apply(l_tilde, z[k - 1], zk, 2.0, false);
        zk -= z[k - 2];
        z.push_back(std::move(zk));
    }
    return z;
}

} // namespace

WeightedGraph build_weight_matrix(const Tensor& travel_time_seconds,
                                  std::vector<std::string> node_labels) {
    require_square(travel_time_seconds, "build_weight_matrix");
    const std::size_t n = travel_time_seconds.rows();
    if (n < 2) throw DataError("build_weight_matrix: need at least 2 nodes");
    if (!node_labels.empty() && node_labels.size() != n) {
        throw DataError("build_weight_matrix: " + std::to_string(node_labels.size()) +
                        " labels for " + std::to_string(n) + " nodes");
    }
    Tensor w({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double t = travel_time_seconds.at(i, j);
            if (std::isinf(t) && t > 0) continue;  // unreachable pair, weight stays 0
            if (!(t > 0.0) || std::isnan(t)) {
                throw DataError("build_weight_matrix: travel time at (" + std::to_string(i) + "," +
                                std::to_string(j) + ") must be positive, got " + std::to_string(t));
            }
            w.at(i, j) = 1.0 / t;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (w.at(i, j) + w.at(j, i));
            w.at(i, j) = m;
            w.at(j, i) = m;
        }
    }
    return WeightedGraph{n, std::move(w), std::move(node_labels)};
}

Tensor normalized_laplacian(const WeightedGraph& g, std::vector<std::string>* warnings) {
    require_square(g.weights, "normalized_laplacian");
    const std::size_t n = g.weights.rows();
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += g.weights.at(i, j);
        if (deg <= 0.0) {
            if (warnings) {
                warnings->push_back("normalized_laplacian: node " + std::to_string(i) +
                                    " is isolated; using degree epsilon 1e-8");
            }
            deg = 1e-8;
        }
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    Tensor l({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double off = -inv_sqrt_deg[i] * g.weights.at(i, j) * inv_sqrt_deg[j];
            l.at(i, j) = (i == j ? 1.0 + off : off);
        }
    }
    return l;
}

double estimate_lambda_max(const Tensor& laplacian) {
    require_symmetric(laplacian, "estimate_lambda_max");
    const std::size_t n = laplacian.rows();
    // Deterministic pseudo-random start so the iterate is not accidentally
    // orthogonal to the top eigenvector.
    Rng rng(0x5CA1AB1Eu);
    Tensor v({n, 1});
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.normal();
    double norm = 0.0;
    for (double x : v.flat()) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v.flat()) x /= norm;

    double lambda = 0.0;
    Tensor w;
    for (int iter = 0; iter < 1000; ++iter) {
        linalg::gemm(laplacian, v, w);
        double rayleigh = 0.0, wnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rayleigh += v[i] * w[i];
            wnorm += w[i] * w[i];
        }
        wnorm = std::sqrt(wnorm);
        if (wnorm == 0.0) break;  // v annihilated; spectrum is {0}
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wnorm;
        const double change = std::fabs(rayleigh - lambda) / std::max(std::fabs(rayleigh), 1e-30);
        lambda = rayleigh;
        if (iter > 0 && change < 1e-9) break;
    }
    return std::max(lambda, 1e-6);
}

ScaledLaplacian scale_laplacian(const WeightedGraph& g, LambdaMaxMode mode) {
    ScaledLaplacian sl;
    sl.node_labels = g.node_labels;
    sl.laplacian = normalized_laplacian(g, &sl.warnings);
    if (mode == LambdaMaxMode::kUpperBound) {
        sl.lambda_max = 2.0;
    } else {
        // The raw estimate undershoots by roughly stop-tol / spectral-gap, so
        // a clustered top of the spectrum can leave the scaled operator's
        // largest eigenvalue a hair above 1. Padding the stored lambda_max
        // keeps the spectrum inside [-1, 1] (the type's contract); 2.0 is an
        // unconditional cap for normalized Laplacians.
        sl.lambda_max = std::min(estimate_lambda_max(sl.laplacian) * (1.0 + 1e-4), 2.0);
    }
    const std::size_t n = sl.laplacian.rows();
    sl.scaled = sl.laplacian;
    sl.scaled *= 2.0 / sl.lambda_max;
    for (std::size_t i = 0; i < n; ++i) sl.scaled.at(i, i) -= 1.0;
    return sl;
}

void symmetric_eigen(const Tensor& a, Tensor& eigenvalues, Tensor& eigenvectors) {
    require_symmetric(a, "symmetric_eigen");
    const std::size_t n = a.rows();
    if (n > 256) throw Error("symmetric_eigen: oracle solver limited to n <= 256");
    Tensor m = a;
    Tensor v = Tensor::identity(n);

    double norm = 0.0;
    for (double x : a.flat()) norm += x * x;
    norm = std::sqrt(norm);
    const double stop = 1e-14 * std::max(norm, 1e-30);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += m.at(p, q) * m.at(p, q);
        }
        off = std::sqrt(2.0 * off);
        if (off <= stop) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                const double diff = m.at(q, q) - m.at(p, p);
                double t;
                if (std::fabs(apq) < 1e-300 * std::fabs(diff)) {
                    t = apq / diff;
                } else {
                    const double theta = diff / (2.0 * apq);
                    t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double app = m.at(p, p), aqq = m.at(q, q);
                m.at(p, p) = app - t * apq;
                m.at(q, q) = aqq + t * apq;
                m.at(p, q) = 0.0;
                m.at(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i != p && i != q) {
                        const double aip = m.at(i, p), aiq = m.at(i, q);
                        m.at(i, p) = aip - s * (aiq + tau * aip);
                        m.at(i, q) = aiq + s * (aip - tau * aiq);
                        m.at(p, i) = m.at(i, p);
                        m.at(q, i) = m.at(i, q);
                    }
                    const double vip = v.at(i, p), viq = v.at(i, q);
                    v.at(i, p) = vip - s * (viq + tau * vip);
                    v.at(i, q) = viq + s * (vip - tau * viq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return m.at(i, i) < m.at(j, j); });
    eigenvalues = Tensor({n});
    eigenvectors = Tensor({n, n});
    for (std::size_t k = 0; k < n; ++k) {
        eigenvalues[k] = m.at(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) eigenvectors.at(i, k) = v.at(i, order[k]);
    }
}

Tensor chebyshev_filter(const ScaledLaplacian& sl, const Tensor& x, const Tensor& theta) {
    check_filter_args(sl, x, theta, "chebyshev_filter");
    const std::size_t order = theta.dim(0), dout = theta.dim(2);
    const std::vector<Tensor> z = cheb_basis(sl.scaled, x, order);
    Tensor y({x.rows(), dout});
    for (std::size_t k = 0; k < order; ++k) {
        const Tensor tk = theta_slice(theta, k);
        linalg::gemm(z[k], tk, y, k > 0);
    }
    return y;
}

Tensor spectral_filter_direct(const ScaledLaplacian& sl, const Tensor& x, const Tensor& theta) {
    check_filter_args(sl, x, theta, "spectral_filter_direct");
    const std::size_t n = sl.n();
    if (x.rows() != n) {
        throw ShapeError("spectral_filter_direct: oracle takes a single n-row signal");
    }
    const std::size_t order = theta.dim(0), din = theta.dim(1), dout = theta.dim(2);

    Tensor evals, evecs;
    symmetric_eigen(sl.laplacian, evals, evecs);

    // xh = U^T x, then per eigenvalue apply g(lambda_tilde) channel-wise.
    Tensor xh;
    linalg::gemm_tn(evecs, x, xh);
    Tensor yh({n, dout});
    std::vector<double> tk(order);
    for (std::size_t i = 0; i < n; ++i) {
        const double lt = 2.0 * evals[i] / sl.lambda_max - 1.0;
        tk[0] = 1.0;
        if (order >= 2) tk[1] = lt;
        for (std::size_t k = 2; k < order; ++k) tk[k] = 2.0 * lt * tk[k - 1] - tk[k - 2];
        for (std::size_t o = 0; o < dout; ++o) {
            double acc = 0.0;
            for (std::size_t k = 0; k < order; ++k) {
                for (std::size_t d = 0; d < din; ++d) {
                    acc += tk[k] * xh.at(i, d) * theta.at(k, d, o);
                }
            }
            yh.at(i, o) = acc;
        }
    }
    Tensor y;
    linalg::gemm(evecs, yh, y);
    return y;
}

Value cheb_filter_op(Tape& tape, Value x, const ScaledLaplacian& sl, Value theta) {
    const Tensor& xt = tape.val(x);
    const Tensor& th = tape.val(theta);
    check_filter_args(sl, xt, th, "cheb_filter_op");
    const std::size_t order = th.dim(0), din = th.dim(1), dout = th.dim(2);

    auto z = std::make_shared<std::vector<Tensor>>(cheb_basis(sl.scaled, xt, order));
    Tensor y({xt.rows(), dout});
    for (std::size_t k = 0; k < order; ++k) {
        const Tensor tk = theta_slice(th, k);
        linalg::gemm((*z)[k], tk, y, k > 0);
    }

    const Tensor* l_tilde = &sl.scaled;
    return tape.custom(
        std::move(y), {x, theta},
        [xi = x.idx, ti = theta.idx, z, l_tilde, order, din, dout](Tape& t, std::size_t self) {
            const Tensor& g = t.cotangent(self);
            const Tensor& th = t.node_value(ti);

            // dTheta_k = z_k^T g; the vertical blocks sum automatically.
            Tensor dtheta({order, din, dout});
            Tensor scratch;
            for (std::size_t k = 0; k < order; ++k) {
                linalg::gemm_tn((*z)[k], g, scratch);
                std::copy(scratch.data(), scratch.data() + din * dout,
                          dtheta.data() + k * din * dout);
            }
            t.accumulate(ti, dtheta);

            // Adjoint of the recurrence: seed a_k = g theta_k^T, then push
            // a_{k-1} += 2 L a_k, a_{k-2} -= a_k for k = K-1..2, and finally
            // a_0 += L a_1 (L_tilde is symmetric, so L^T = L).
            std::vector<Tensor> adj(order);
            for (std::size_t k = 0; k < order; ++k) {
                linalg::gemm_nt(g, theta_slice(th, k), adj[k]);
            }
            for (std::size_t k = order; k-- > 2;) {
                blocked_apply(*l_tilde, adj[k], adj[k - 1], 2.0, true);
                adj[k - 2] -= adj[k];
            }
            if (order >= 2) blocked_apply(*l_tilde, adj[1], adj[0], 1.0, true);
            t.accumulate(xi, adj[0]);
        });
}

Value gcnn_layer(Tape& tape, Value x, const ScaledLaplacian& sl, Value theta, Value bias,
                 Activation act) {
    Value filtered = cheb_filter_op(tape, x, sl, theta);
    Value biased = tape.add_rowvec(filtered, bias);
    return tape.apply(biased, act);
}

std::vector<std::size_t> hop_distances(const Tensor& weights, std::size_t v) {
    require_square(weights, "hop_distances");
    const std::size_t n = weights.rows();
    if (v >= n) throw Error("hop_distances: start node out of range");
    std::vector<std::size_t> dist(n, static_cast<std::size_t>(-1));
    std::deque<std::size_t> queue{v};
    dist[v] = 0;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t j = 0; j < n; ++j) {
            if (weights.at(u, j) > 0.0 && dist[j] == static_cast<std::size_t>(-1)) {
                dist[j] = dist[u] + 1;
                queue.push_back(j);
            }
        }
    }
    return dist;
}

} // namespace parkcast
