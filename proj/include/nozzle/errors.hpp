#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nozzle {

// Base of every error raised by the library. Callers that only care about
// "the evaluation failed" can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryInfeasible : public Error {
public:
    using Error::Error;
};

class ConstraintViolated : public Error {
public:
    using Error::Error;
};

class MeshFailure : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

class InfeasibleStart : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Carries every violated invariant at once, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "invalid configuration:";
        for (const auto& s : items) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }
    std::vector<std::string> problems_;
};

// Nonlinear solve or root-find that did not reach its tolerance.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::vector<double> residual_history = {},
                  int last_good_stage = -1)
        : Error(what), history_(std::move(residual_history)), last_good_stage_(last_good_stage) {}

    const std::vector<double>& residual_history() const noexcept { return history_; }
    // Index into the continuation schedule of the last stage that converged, -1 if none.
    int last_good_stage() const noexcept { return last_good_stage_; }

private:
    std::vector<double> history_;
    int last_good_stage_;
};

}  // namespace nozzle
