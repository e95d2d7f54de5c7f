#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

namespace sitepath {

/// Wall-clock budget measured from construction.
class Deadline {
public:
    using clock = std::chrono::steady_clock;

    explicit Deadline(double budget_s = std::numeric_limits<double>::infinity())
        : start_(clock::now()), budget_s_(budget_s) {}

    double elapsed_s() const { return std::chrono::duration<double>(clock::now() - start_).count(); }
    double budget_s() const { return budget_s_; }
    double remaining_s() const { return budget_s_ - elapsed_s(); }
    bool expired() const { return elapsed_s() >= budget_s_; }

    /// A deadline that expires at `fraction` of this one's budget, sharing the start time.
    Deadline scaled(double fraction) const {
        Deadline d = *this;
        d.budget_s_ = budget_s_ * fraction;
        return d;
    }

    /// A deadline that expires after `budget_s` or with this one, whichever is first.
    Deadline sub(double budget_s) const {
        Deadline d;
        d.budget_s_ = std::min(budget_s, remaining_s());
        return d;
    }

private:
    clock::time_point start_;
    double budget_s_;
};

class DeadlineExceeded : public std::runtime_error {
public:
    DeadlineExceeded() : std::runtime_error("deadline exceeded") {}
};

}  // namespace sitepath
