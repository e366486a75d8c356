#pragma once

#include <cmath>
#include <vector>

#include "skinburst/lattice.hpp"

namespace testing {

inline skinburst::LatticeConfig symmetric(int N, double eta, std::vector<int> impurities) {
    skinburst::LatticeConfig c;
    c.N = N;
    c.J = 1.0;
    c.t = 0.5;
    c.gamma = 0.5;
    c.eta = eta;
    c.impurities = std::move(impurities);
    return skinburst::validate_config(c);
}

}  // namespace testing
