#pragma once

#include <functional>

#include "parkcast/params.hpp"

namespace parkcast {

// Central-difference audit of analytic gradients.
//
// loss_fn(with_grad) must evaluate the loss on the current parameter values;
// when with_grad is true it must also leave fresh gradients in the store
// (gradients are zeroed here first). The function is called twice up front
// with identical state; if the two results differ at all the computation is
// not deterministic and no finite-difference comparison can be trusted, so
// this throws.
//
// Returns the maximum over all parameter entries of
//   |analytic - central| / max(|analytic|, |central|, 1e-12).
// A store with zero parameter entries yields 0.
double check_gradient(const std::function<double(bool with_grad)>& loss_fn, ParamStore& params,
                      double step = 1e-6);

} // namespace parkcast
