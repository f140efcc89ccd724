#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace swarm::msg {

using AgentId = std::uint32_t;
using JobId = std::uint64_t;
using InstanceId = std::uint64_t;

enum class PlatformKind : std::uint8_t { quad, ugv, vtol, c2 };
enum class AgentStatus : std::uint8_t { idle, tasked, killed, disabled };
enum class PayloadKind : std::uint8_t { none, ew, ap, as, cf };

/// Roles carried by outer/inner fiducials. person, device, building_label and
/// intel are also the general classes visible from the outer tag alone.
enum class ArtifactRole : std::uint8_t { person, device, hvt, hostile, ied, medic, benign, building_label, intel };

enum class TaskOutcome : std::uint8_t { succeeded, failed, cancelled };

/// C2-side view of an agent; `unknown` replaces the reported status once the
/// heartbeat is stale.
enum class DisplayStatus : std::uint8_t { idle, tasked, killed, disabled, unknown };

inline bool is_air(PlatformKind k) { return k == PlatformKind::quad || k == PlatformKind::vtol; }

/// Class an observer can assign from the outer tag only.
ArtifactRole recognized_class(ArtifactRole role);

std::string_view to_string(PlatformKind k);
std::string_view to_string(AgentStatus s);
std::string_view to_string(PayloadKind p);
std::string_view to_string(ArtifactRole r);
std::string_view to_string(TaskOutcome o);
std::string_view to_string(DisplayStatus s);

/// Parsers return nullopt for unrecognised names.
std::optional<PlatformKind> parse_platform(std::string_view s);
std::optional<PayloadKind> parse_payload(std::string_view s);
std::optional<ArtifactRole> parse_role(std::string_view s);
std::optional<AgentStatus> parse_status(std::string_view s);

}  // namespace swarm::msg
