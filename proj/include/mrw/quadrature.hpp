#pragma once

#include <vector>

namespace mrw {

// Nodes and weights for the physicists' Hermite weight exp(-u^2):
// sum_k w_k f(u_k) ~ integral f(u) exp(-u^2) du. Nodes ascend.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

[[nodiscard]] GaussHermiteRule make_gauss_hermite(int n);

// Shared immutable 40-node table used by both cascade models.
[[nodiscard]] const GaussHermiteRule& gauss_hermite_40();

}  // namespace mrw
