#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace proxilink::layout {

using ParticipantId = std::string;
using SlotId = std::string;

// Proxemic distance bands. Order matters: comparisons follow
// increasing distance.
enum class Zone { Intimate = 0, Personal = 1, Social = 2, Public = 3 };

inline constexpr double kIntimateLimitM = 0.45;
inline constexpr double kPersonalLimitM = 1.20;
inline constexpr double kSocialLimitM = 3.60;

// Boundary values belong to the nearer zone.
Zone classify_zone(double distance_m);
const char* zone_name(Zone zone);

struct ProjectionSlot {
  SlotId id;
  std::string label;
  double distance_m = 0.0;
  std::string quad_ref;
};

// Slots of one room, kept sorted by distance (nearest first). Ties keep
// insertion order.
class SlotSet {
 public:
  SlotSet() = default;
  explicit SlotSet(std::vector<ProjectionSlot> slots);

  const std::vector<ProjectionSlot>& slots() const noexcept { return slots_; }
  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }

  bool contains(const SlotId& id) const { return rank_of(id).has_value(); }
  std::optional<std::size_t> rank_of(const SlotId& id) const;
  const ProjectionSlot& at_rank(std::size_t rank) const { return slots_.at(rank); }

 private:
  std::vector<ProjectionSlot> slots_;
};

enum class GainMode { RankTable, InverseSquare };

struct GainPolicy {
  GainMode mode = GainMode::RankTable;
  std::vector<double> rank_table{1.0, 0.25, 0.1};

  static GainPolicy inverse_square() { return GainPolicy{GainMode::InverseSquare, {1.0, 0.25, 0.1}}; }

  // Throws Configuration unless every gain is in [0,1], the table is
  // non-increasing and starts at 1.0.
  void validate() const;
};

struct LayoutState {
  std::map<ParticipantId, SlotId> assignment;
  std::uint64_t version = 0;

  friend bool operator==(const LayoutState&, const LayoutState&) = default;
};

enum class Direction { Forward, Backward };

const char* direction_name(Direction direction);
Direction parse_direction(const std::string& text);

using GainMap = std::map<ParticipantId, double>;

GainMap gains_for_layout(const LayoutState& layout, const SlotSet& slots, const GainPolicy& policy);

struct RotateResult {
  LayoutState layout;
  bool noop = false;
};

// Cycles the occupied slots along the distance order. Forward moves every
// participant one occupied slot farther; the farthest wraps to the nearest.
RotateResult rotate_layout(const LayoutState& layout, const SlotSet& slots, Direction direction);

// Moves an assigned participant onto `slot`, swapping with its occupant.
LayoutState set_assignment(const LayoutState& layout, const SlotSet& slots,
                           const ParticipantId& participant, const SlotId& slot);

// Membership plumbing used by rooms: seat a new participant on a free slot,
// or drop one from the assignment.
LayoutState place(const LayoutState& layout, const SlotSet& slots,
                  const ParticipantId& participant, const SlotId& slot);
LayoutState unassign(const LayoutState& layout, const ParticipantId& participant);

std::optional<SlotId> nearest_free_slot(const LayoutState& layout, const SlotSet& slots);

// Throws Validation if the assignment is not a bijection onto existing slots.
void check_invariants(const LayoutState& layout, const SlotSet& slots);

}  // namespace proxilink::layout
