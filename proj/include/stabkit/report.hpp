#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stabkit/definability.hpp"
#include "stabkit/order.hpp"
#include "stabkit/table.hpp"
#include "stabkit/types_space.hpp"

namespace stabkit {

using json = nlohmann::json;

json to_json(const Ladder& l);
json to_json(const DoubleLimitReport& r);
json to_json(const ConvexDefinition& d);
json to_json(const MajorityDefinition& d);
json type_point_to_json(const TypePoint& p, const std::string& columns_hash);

/// Rolling FNV-1a 64 content hash of everything an invocation read.
class InputDigest {
public:
    void feed(const std::string& bytes) {
        for (char c : bytes) {
            h_ ^= static_cast<unsigned char>(c);
            h_ *= 1099511628211ull;
        }
    }
    std::string hex() const;

private:
    std::uint64_t h_ = 1469598103934665603ull;
};

/// Machine-readable result envelope. Identical inputs and seed give a
/// byte-identical document except for the "timings" object.
class ReportBuilder {
public:
    ReportBuilder(std::string command, std::vector<std::string> argv,
                  std::uint64_t seed);

    void stage_done(const std::string& name, double wall_ms);
    void set_payload(json payload) { payload_ = std::move(payload); }
    InputDigest& digest() { return digest_; }

    json finish() const;

private:
    std::string command_;
    std::vector<std::string> argv_;
    std::uint64_t seed_;
    InputDigest digest_;
    json timings_ = json::object();
    json payload_ = json::object();
};

} // namespace stabkit
