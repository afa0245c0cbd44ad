#ifndef SIGLOOP_LOOPS_NELDER_MEAD_HPP
#define SIGLOOP_LOOPS_NELDER_MEAD_HPP

#include <functional>
#include <vector>

namespace sigloop::loops {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
};

// Derivative-free simplex descent; stops when the simplex value spread drops
// below value_tol or after max_iter reflections.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, double scale, double value_tol,
                             int max_iter);

}  // namespace sigloop::loops

#endif
