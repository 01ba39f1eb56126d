#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "layout.hpp"
#include "protocol.hpp"

namespace proxilink::session {

struct LayoutView {
  layout::LayoutState layout;
  std::vector<std::string> slot_order;
  std::deque<std::string> queue;
  layout::GainMap gains;
};

// Throws Format if the payload does not have the layout-state shape.
LayoutView parse_layout_payload(const Json& payload);

// Client-side mirror of a room built only from the broadcast stream.
//
// Rotations and placements of seated peers are re-derived locally with the
// layout functions and must agree with the server's snapshot; membership
// changes adopt the snapshot. Every layout-state's gain map is recomputed and
// compared exactly. Any disagreement throws Validation.
class RoomReplica {
 public:
  // Returns false for frames that do not affect the replica (including stale
  // sequence numbers).
  bool apply(const WireMessage& msg);

  bool joined() const noexcept { return joined_; }
  std::uint64_t seq() const noexcept { return seq_; }
  const layout::LayoutState& layout() const noexcept { return view_.layout; }
  const std::deque<std::string>& queue() const noexcept { return view_.queue; }
  const layout::GainMap& gains() const noexcept { return view_.gains; }
  std::size_t stale_frames() const noexcept { return stale_; }
  std::size_t rederived() const noexcept { return rederived_; }
  std::uint64_t state_hash() const;

 private:
  void apply_layout(const Json& payload);

  bool joined_ = false;
  std::uint64_t seq_ = 0;
  layout::SlotSet slots_;
  layout::GainPolicy policy_;
  LayoutView view_;
  std::size_t stale_ = 0;
  std::size_t rederived_ = 0;
};

}  // namespace proxilink::session
