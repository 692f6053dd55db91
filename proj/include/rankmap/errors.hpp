#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankmap {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or size disagreement between operands.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

// Input violates a value-level precondition (non-finite entry, bad config).
class InvalidArgumentError : public Error {
public:
    explicit InvalidArgumentError(const std::string& what) : Error(what) {}
};

// Input carries no usable signal (e.g. an all-zero matrix).
class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& what) : Error(what) {}
};

// A basis expected to have full column rank did not; carries the rank that
// the pivoted factorization detected.
class IllConditionedError : public Error {
public:
    IllConditionedError(const std::string& what, std::size_t detected_rank)
        : Error(what), detected_rank(detected_rank) {}
    std::size_t detected_rank;
};

// An iteration produced a non-finite value; carries the step size and the
// iteration at which the blow-up was detected.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double step_size, std::size_t iteration)
        : Error(what), step_size(step_size), iteration(iteration) {}
    double step_size;
    std::size_t iteration;
};

// An eigensolver ran out of iterations; carries the pairs that did converge
// so a caller can keep partial results.
class EigenConvergenceError : public Error {
public:
    EigenConvergenceError(const std::string& what,
                          std::vector<double> converged_values,
                          std::vector<std::vector<double>> converged_vectors)
        : Error(what),
          converged_values(std::move(converged_values)),
          converged_vectors(std::move(converged_vectors)) {}
    std::vector<double> converged_values;
    std::vector<std::vector<double>> converged_vectors;
};

// Malformed file content; byte_offset points at the failing position.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset(byte_offset) {}
    std::size_t byte_offset;
};

// The tolerance search hit its floor without meeting the target; carries the
// best pair seen so the caller can decide whether it is close enough.
class UnreachableTargetError : public Error {
public:
    UnreachableTargetError(const std::string& what, double best_delta_d, double best_delta_l)
        : Error(what), best_delta_d(best_delta_d), best_delta_l(best_delta_l) {}
    double best_delta_d;
    double best_delta_l;
};

}  // namespace rankmap
