#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bsdelab/certificate.hpp"
#include "bsdelab/errors.hpp"

namespace bsde::cli {

/// Invalid or incomplete configuration; `path` locates the offending key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& message)
        : Error(path + ": " + message), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

enum ExitCode : int { exit_pass = 0, exit_check_failed = 1, exit_config_error = 2, exit_runtime_error = 3 };

/// Entry point behind the `bsdelab` executable. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Certificate from its JSON form, e.g.
/// {"kind": "one_sided_linear", "f": "1", "u": "1", "v": "1", "side": "sign"}.
AssumptionCertificate parse_certificate(const nlohmann::json& j, const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

}  // namespace bsde::cli
