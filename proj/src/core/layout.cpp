#include "layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "error.hpp"

namespace proxilink::layout {

Zone classify_zone(double distance_m) {
  if (!std::isfinite(distance_m) || distance_m <= 0.0)
    throw Error(ErrorCode::Domain, "distance must be positive and finite");
  if (distance_m <= kIntimateLimitM) return Zone::Intimate;
  if (distance_m <= kPersonalLimitM) return Zone::Personal;
  if (distance_m <= kSocialLimitM) return Zone::Social;
  return Zone::Public;
}

const char* zone_name(Zone zone) {
  switch (zone) {
    case Zone::Intimate: return "Intimate";
    case Zone::Personal: return "Personal";
    case Zone::Social: return "Social";
    case Zone::Public: return "Public";
  }
  return "unknown";
}

SlotSet::SlotSet(std::vector<ProjectionSlot> slots) : slots_(std::move(slots)) {
  std::set<SlotId> seen;
  for (const auto& slot : slots_) {
    if (!std::isfinite(slot.distance_m) || slot.distance_m <= 0.0)
      throw Error(ErrorCode::Validation, "slot '" + slot.id + "': distance_m must be positive");
    if (!seen.insert(slot.id).second)
      throw Error(ErrorCode::Validation, "slot '" + slot.id + "': duplicate slot id");
  }
  std::stable_sort(slots_.begin(), slots_.end(),
                   [](const auto& a, const auto& b) { return a.distance_m < b.distance_m; });
}

std::optional<std::size_t> SlotSet::rank_of(const SlotId& id) const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].id == id) return i;
  return std::nullopt;
}

void GainPolicy::validate() const {
  if (mode == GainMode::InverseSquare) return;
  if (rank_table.empty() || rank_table.front() != 1.0)
    throw Error(ErrorCode::Configuration, "rank_table must start with 1.0");
  for (std::size_t i = 0; i < rank_table.size(); ++i) {
    const double g = rank_table[i];
    if (!(g >= 0.0 && g <= 1.0))
      throw Error(ErrorCode::Configuration, "rank_table entries must lie in [0,1]");
    if (i > 0 && g > rank_table[i - 1])
      throw Error(ErrorCode::Configuration, "rank_table must be non-increasing");
  }
}

const char* direction_name(Direction direction) {
  return direction == Direction::Forward ? "forward" : "backward";
}

Direction parse_direction(const std::string& text) {
  if (text == "forward") return Direction::Forward;
  if (text == "backward") return Direction::Backward;
  throw Error(ErrorCode::Format, "unknown rotation direction '" + text + "'");
}

namespace {

std::size_t require_rank(const SlotSet& slots, const SlotId& slot) {
  auto rank = slots.rank_of(slot);
  if (!rank) throw Error(ErrorCode::NotFound, "unknown slot '" + slot + "'");
  return *rank;
}

}  // namespace

GainMap gains_for_layout(const LayoutState& layout, const SlotSet& slots, const GainPolicy& policy) {
  GainMap gains;
  if (layout.assignment.empty()) return gains;

  if (policy.mode == GainMode::RankTable) {
    if (slots.size() > policy.rank_table.size())
      throw Error(ErrorCode::Configuration, "rank table has " + std::to_string(policy.rank_table.size()) +
                                                " entries but the room has " + std::to_string(slots.size()) +
                                                " slots");
    for (const auto& [participant, slot] : layout.assignment)
      gains[participant] = policy.rank_table[require_rank(slots, slot)];
    return gains;
  }

  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& [participant, slot] : layout.assignment)
    nearest = std::min(nearest, slots.at_rank(require_rank(slots, slot)).distance_m);
  for (const auto& [participant, slot] : layout.assignment) {
    const double d = slots.at_rank(require_rank(slots, slot)).distance_m;
    const double ratio = nearest / d;
    gains[participant] = std::clamp(ratio * ratio, 0.0, 1.0);
  }
  return gains;
}

RotateResult rotate_layout(const LayoutState& layout, const SlotSet& slots, Direction direction) {
  if (layout.assignment.size() < 2) return {layout, true};

  // (rank, participant) pairs in distance order.
  std::vector<std::pair<std::size_t, ParticipantId>> occupied;
  occupied.reserve(layout.assignment.size());
  for (const auto& [participant, slot] : layout.assignment)
    occupied.emplace_back(require_rank(slots, slot), participant);
  std::sort(occupied.begin(), occupied.end());

  const std::size_t n = occupied.size();
  LayoutState next{{}, layout.version + 1};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t target = direction == Direction::Forward ? (k + 1) % n : (k + n - 1) % n;
    next.assignment[occupied[k].second] = slots.at_rank(occupied[target].first).id;
  }
  return {std::move(next), false};
}

LayoutState set_assignment(const LayoutState& layout, const SlotSet& slots,
                           const ParticipantId& participant, const SlotId& slot) {
  require_rank(slots, slot);
  auto self = layout.assignment.find(participant);
  if (self == layout.assignment.end())
    throw Error(ErrorCode::NotFound, "unknown participant '" + participant + "'");

  LayoutState next{layout.assignment, layout.version + 1};
  const SlotId previous = self->second;
  for (auto& [other, other_slot] : next.assignment) {
    if (other != participant && other_slot == slot) {
      other_slot = previous;
      break;
    }
  }
  next.assignment[participant] = slot;
  return next;
}

LayoutState place(const LayoutState& layout, const SlotSet& slots,
                  const ParticipantId& participant, const SlotId& slot) {
  require_rank(slots, slot);
  if (layout.assignment.contains(participant))
    throw Error(ErrorCode::Validation, "participant '" + participant + "' is already placed");
  for (const auto& [other, other_slot] : layout.assignment)
    if (other_slot == slot) throw Error(ErrorCode::Validation, "slot '" + slot + "' is occupied");
  LayoutState next{layout.assignment, layout.version + 1};
  next.assignment[participant] = slot;
  return next;
}

LayoutState unassign(const LayoutState& layout, const ParticipantId& participant) {
  if (!layout.assignment.contains(participant))
    throw Error(ErrorCode::NotFound, "unknown participant '" + participant + "'");
  LayoutState next{layout.assignment, layout.version + 1};
  next.assignment.erase(participant);
  return next;
}

std::optional<SlotId> nearest_free_slot(const LayoutState& layout, const SlotSet& slots) {
  std::set<SlotId> taken;
  for (const auto& [participant, slot] : layout.assignment) taken.insert(slot);
  for (const auto& slot : slots.slots())
    if (!taken.contains(slot.id)) return slot.id;
  return std::nullopt;
}

void check_invariants(const LayoutState& layout, const SlotSet& slots) {
  std::set<SlotId> taken;
  for (const auto& [participant, slot] : layout.assignment) {
    if (!slots.contains(slot))
      throw Error(ErrorCode::Validation, "participant '" + participant + "' holds unknown slot '" + slot + "'");
    if (!taken.insert(slot).second)
      throw Error(ErrorCode::Validation, "slot '" + slot + "' is shared");
  }
}

}  // namespace proxilink::layout
