#include "stabkit/report.hpp"

#include "stabkit/version.hpp"

namespace stabkit {

json to_json(const Ladder& l) {
    return json{
        {"rows", l.row_indices},
        {"cols", l.col_indices},
        {"r", l.r},
        {"s", l.s},
        {"direction", l.direction == Ladder::Direction::HighAbove
                          ? "high-above"
                          : "low-above"},
        {"length", l.length()},
    };
}

json to_json(const DoubleLimitReport& r) {
    json j{
        {"window", r.window},
        {"tolerance", r.tolerance},
        {"limit_nm", nullptr},
        {"limit_mn", nullptr},
        {"gap", nullptr},
        {"inner_converged_nm", r.inner_converged_nm},
        {"inner_converged_mn", r.inner_converged_mn},
    };
    if (r.limit_nm) j["limit_nm"] = *r.limit_nm;
    if (r.limit_mn) j["limit_mn"] = *r.limit_mn;
    if (r.gap) j["gap"] = *r.gap;
    return j;
}

json to_json(const ConvexDefinition& d) {
    return json{
        {"kind", "convex"},
        {"rows", d.support},
        {"weights", d.weights},
        {"sup_error", d.sup_error},
    };
}

json to_json(const MajorityDefinition& d) {
    return json{
        {"kind", "majority"},
        {"rows", d.rows},
        {"k", d.k},
        {"sup_error", d.exact ? 0.0 : 1.0},
    };
}

json type_point_to_json(const TypePoint& p, const std::string& columns_hash) {
    return json{{"values", p.values}, {"columns_hash", columns_hash}};
}

std::string InputDigest::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out = "fnv1a64:";
    for (int i = 15; i >= 0; --i) out += digits[(h_ >> (4 * i)) & 0xf];
    return out;
}

ReportBuilder::ReportBuilder(std::string command,
                             std::vector<std::string> argv, std::uint64_t seed)
    : command_(std::move(command)), argv_(std::move(argv)), seed_(seed) {}

void ReportBuilder::stage_done(const std::string& name, double wall_ms) {
    timings_[name] = wall_ms;
}

json ReportBuilder::finish() const {
    return json{
        {"schema", kReportSchema},
        {"tool_version", kToolVersion},
        {"command", command_},
        {"argv", argv_},
        {"seed", seed_},
        {"input_digest", digest_.hex()},
        {"payload", payload_},
        {"timings", timings_},
    };
}

} // namespace stabkit
