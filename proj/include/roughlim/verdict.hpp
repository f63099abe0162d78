#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

namespace roughlim {

using json = nlohmann::json;

/// Three-valued outcome of a decision procedure. Unknown is a first-class
/// answer: it means the structural provers could not certify either side.
enum class Outcome { Holds, Fails, Unknown };

inline std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Holds: return "holds";
        case Outcome::Fails: return "fails";
        case Outcome::Unknown: return "unknown";
    }
    return "unknown";
}

inline Outcome outcome_from_string(std::string_view s) {
    if (s == "holds") return Outcome::Holds;
    if (s == "fails") return Outcome::Fails;
    if (s == "unknown") return Outcome::Unknown;
    throw std::invalid_argument("not an outcome: " + std::string(s));
}

/// A verdict couples an outcome with a machine-readable certificate.
/// Holds/Fails certificates contain enough data to replay the decision;
/// Unknown carries window evidence describing what was inconclusive.
struct Verdict {
    Outcome outcome = Outcome::Unknown;
    json certificate = json::object();

    static Verdict holds(json cert) { return {Outcome::Holds, std::move(cert)}; }
    static Verdict fails(json cert) { return {Outcome::Fails, std::move(cert)}; }
    static Verdict unknown(json cert = json::object()) {
        return {Outcome::Unknown, std::move(cert)};
    }

    bool is_holds() const { return outcome == Outcome::Holds; }
    bool is_fails() const { return outcome == Outcome::Fails; }
    bool is_unknown() const { return outcome == Outcome::Unknown; }
};

inline json to_json(const Verdict& v) {
    return json{{"outcome", to_string(v.outcome)}, {"certificate", v.certificate}};
}

/// Raised when a window/sample request exceeds the configured cap.
struct WindowCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a theorem verifier's hypothesis check fails; `which` names
/// the hypothesis so callers can report it (this is not a Fails verdict).
struct HypothesisError : std::runtime_error {
    std::string which;
    json evidence;
    HypothesisError(std::string which_, const std::string& msg, json evidence_ = {})
        : std::runtime_error(msg), which(std::move(which_)), evidence(std::move(evidence_)) {}
};

/// Raised when an operation's stated precondition is not established.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace roughlim
