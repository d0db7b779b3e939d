#include "bsdelab/report.hpp"

#include <json.hpp>

namespace bsde {

std::string_view to_string(Status s) noexcept {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

void VerificationReport::settle() {
    status = worst_violation > tolerance ? Status::fail : Status::pass;
}

void VerificationReport::observe(double violation, const std::string& where) {
    observe_with(violation, [&] { return where; });
}

std::string VerificationReport::to_json() const {
    nlohmann::json j{
        {"name", name},
        {"reference", reference},
        {"status", std::string(bsde::to_string(status))},
        {"violation", worst_violation},
        {"location", location},
        {"tolerance", tolerance},
        {"notes", notes},
    };
    return j.dump();
}

}  // namespace bsde
