#include "parkcast/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace parkcast {

double check_gradient(const std::function<double(bool with_grad)>& loss_fn, ParamStore& params,
                      double step) {
    if (!(step > 0.0)) throw Error("check_gradient: step must be positive");

    const double l1 = loss_fn(false);
    const double l2 = loss_fn(false);
    if (!(l1 == l2)) {
        throw Error("check_gradient: loss is not deterministic (" + std::to_string(l1) + " vs " +
                    std::to_string(l2) + "); disable dropout or fix the seed");
    }

    params.zero_grads();
    (void)loss_fn(true);

    std::vector<Tensor> analytic;
    for (ParamTensor* p : params.all()) analytic.push_back(p->grad);

    double worst = 0.0;
    std::size_t pi = 0;
    for (ParamTensor* p : params.all()) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + step;
            const double lp = loss_fn(false);
            p->value[i] = orig - step;
            const double lm = loss_fn(false);
            p->value[i] = orig;
            const double central = (lp - lm) / (2.0 * step);
            const double a = analytic[pi][i];
            const double denom = std::max({std::fabs(a), std::fabs(central), 1e-12});
            worst = std::max(worst, std::fabs(a - central) / denom);
        }
        ++pi;
    }
    return worst;
}

} // namespace parkcast
