#include "swarm/msg/types.hpp"

#include <array>

namespace swarm::msg {

namespace {

constexpr std::array<std::string_view, 4> kPlatforms{"quad", "ugv", "vtol", "c2"};
constexpr std::array<std::string_view, 4> kStatuses{"idle", "tasked", "killed", "disabled"};
constexpr std::array<std::string_view, 5> kPayloads{"none", "EW", "AP", "AS", "CF"};
constexpr std::array<std::string_view, 9> kRoles{"person", "device", "hvt",           "hostile", "ied",
                                                 "medic",  "benign", "building_label", "intel"};
constexpr std::array<std::string_view, 3> kOutcomes{"succeeded", "failed", "cancelled"};
constexpr std::array<std::string_view, 5> kDisplay{"idle", "tasked", "killed", "disabled", "unknown"};

template <class E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  return std::nullopt;
}

template <std::size_t N>
std::string_view name_of(const std::array<std::string_view, N>& names, std::size_t i) {
  return i < N ? names[i] : std::string_view{"?"};
}

}  // namespace

ArtifactRole recognized_class(ArtifactRole role) {
  switch (role) {
    case ArtifactRole::hvt:
    case ArtifactRole::hostile:
    case ArtifactRole::medic:
    case ArtifactRole::benign:
    case ArtifactRole::person:
      return ArtifactRole::person;
    case ArtifactRole::ied:
    case ArtifactRole::device:
      return ArtifactRole::device;
    case ArtifactRole::building_label:
    case ArtifactRole::intel:
      return role;
  }
  return role;
}

std::string_view to_string(PlatformKind k) { return name_of(kPlatforms, static_cast<std::size_t>(k)); }
std::string_view to_string(AgentStatus s) { return name_of(kStatuses, static_cast<std::size_t>(s)); }
std::string_view to_string(PayloadKind p) { return name_of(kPayloads, static_cast<std::size_t>(p)); }
std::string_view to_string(ArtifactRole r) { return name_of(kRoles, static_cast<std::size_t>(r)); }
std::string_view to_string(TaskOutcome o) { return name_of(kOutcomes, static_cast<std::size_t>(o)); }
std::string_view to_string(DisplayStatus s) { return name_of(kDisplay, static_cast<std::size_t>(s)); }

std::optional<PlatformKind> parse_platform(std::string_view s) { return lookup<PlatformKind>(kPlatforms, s); }
std::optional<PayloadKind> parse_payload(std::string_view s) { return lookup<PayloadKind>(kPayloads, s); }
std::optional<ArtifactRole> parse_role(std::string_view s) { return lookup<ArtifactRole>(kRoles, s); }
std::optional<AgentStatus> parse_status(std::string_view s) { return lookup<AgentStatus>(kStatuses, s); }

}  // namespace swarm::msg
