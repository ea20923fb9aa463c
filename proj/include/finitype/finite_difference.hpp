#pragma once

#include <functional>
#include <vector>

namespace finitype {

// Fornberg weights for the m-th derivative at 0 on the given nodes.
std::vector<double> fornberg_weights(const std::vector<double>& x, int m);

// d^alpha g(x0) from a tensor product of second-order central stencils with
// step h0, improved by one Richardson step (4 E(h0/2) - E(h0)) / 3.
double fd_partial(const std::function<double(const std::vector<double>&)>& g, const std::vector<double>& x0,
                  const std::vector<int>& alpha, double h0);

}  // namespace finitype
