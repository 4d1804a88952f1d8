#pragma once

#include <cstddef>
#include <vector>

namespace cascadelab {

// Activation densities on a time grid, aggregate and per degree class.
//
// Shared by the simulator and the analytical approximation so the two can be
// overlaid column for column. rho1_k[c][j] is the S1 density of degree class
// degrees[c] at time t[j].
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> rho1;
    std::vector<double> rho2;
    std::vector<std::size_t> degrees;
    std::vector<std::vector<double>> rho1_k;
    std::vector<std::vector<double>> rho2_k;

    // State when the run or integration stopped (fixpoint or horizon).
    double final_rho1 = 0.0;
    double final_rho2 = 0.0;
    std::vector<double> final_rho1_k;
    std::vector<double> final_rho2_k;

    std::size_t size() const noexcept { return t.size(); }

    // Fraction of class c that is S1- but not S2-active, over time.
    std::vector<double> s1_only(std::size_t c) const {
        std::vector<double> out(t.size());
        for (std::size_t j = 0; j < t.size(); ++j) out[j] = rho1_k[c][j] - rho2_k[c][j];
        return out;
    }

    // Index of the class with degree k, or degrees.size() when absent.
    std::size_t class_index(std::size_t k) const noexcept {
        for (std::size_t c = 0; c < degrees.size(); ++c)
            if (degrees[c] == k) return c;
        return degrees.size();
    }
};

// n uniform samples over [0, t_max], both ends included.
std::vector<double> uniform_grid(double t_max, std::size_t n);

}  // namespace cascadelab
