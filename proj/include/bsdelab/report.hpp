#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bsde {

enum class Status { pass, fail, inconclusive };

std::string_view to_string(Status s) noexcept;

/// Outcome of one executable check.
///
/// `worst_violation` is signed: the largest value of (left side - right side)
/// of the checked inequality, so anything <= tolerance passes and a negative
/// value reports slack. `fail` holds exactly when worst_violation > tolerance;
/// `inconclusive` only when a precondition failed before the check ran.
struct VerificationReport {
    std::string name;
    std::string reference;
    Status status = Status::inconclusive;
    double worst_violation = 0.0;
    std::string location;
    double tolerance = 0.0;
    std::vector<std::string> notes;

    bool passed() const noexcept { return status == Status::pass; }

    /// Sets status from worst_violation against tolerance.
    void settle();

    /// Records `violation` at `where` if it exceeds the current worst.
    void observe(double violation, const std::string& where);

    /// Lazily formatted variant; `where` is only built when needed.
    template <typename F>
    void observe_with(double violation, F&& where) {
        if (!seen_ || violation > worst_violation) {
            worst_violation = violation;
            location = where();
            seen_ = true;
        }
    }

    /// One JSON object per report.
    std::string to_json() const;

private:
    bool seen_ = false;
};

}  // namespace bsde
