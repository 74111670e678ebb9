#pragma once

#include <cstdint>
#include <optional>

#include "rezone/trace.hpp"

namespace rezone {

enum class MqChannel : uint8_t { MuA, MuB };  // A: cluster -> ACU, B: ACU -> cluster

struct MqMessage {
  MqChannel channel = MqChannel::MuA;
  MqKind kind = MqKind::UnlockPpc;
  uint64_t token_claim = 0;
  int sender_core = -1;
};

/// The messaging-unit device. One mailbox per direction; payloads live in
/// device registers only, never in memory words or cache lines. The MU_A
/// doorbell occupies the last line of SHARED (cluster-writable in every row),
/// the MU_B doorbell the last line of GATEKEEPER (ACU-only), so the PPC's
/// region permissions are exactly the channel access control.
struct MuDevice {
  std::optional<MqMessage> request;  // A -> B, in flight
  std::optional<MqMessage> reply;    // B -> A reply register

  bool request_pending() const { return request.has_value(); }
};

inline constexpr uint64_t kMuWindowBytes = 16;

}  // namespace rezone
