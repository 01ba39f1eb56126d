#include "replica.hpp"

#include "error.hpp"
#include "room.hpp"

namespace proxilink::session {

LayoutView parse_layout_payload(const Json& payload) {
  try {
    LayoutView view;
    view.layout.version = payload.at("version").get<std::uint64_t>();
    for (const auto& [participant, slot] : payload.at("assignment").items())
      view.layout.assignment[participant] = slot.get<std::string>();
    for (const auto& slot : payload.at("slot_order")) view.slot_order.push_back(slot.get<std::string>());
    for (const auto& q : payload.at("queue")) view.queue.push_back(q.get<std::string>());
    for (const auto& [participant, gain] : payload.at("gains").items()) view.gains[participant] = gain.get<double>();
    return view;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad layout-state payload: ") + e.what());
  }
}

std::uint64_t RoomReplica::state_hash() const { return session::state_hash(view_.layout, view_.queue, view_.gains); }

bool RoomReplica::apply(const WireMessage& msg) {
  if (msg.type == MessageType::Joined) {
    const auto& p = msg.payload;
    std::vector<layout::ProjectionSlot> slots;
    for (const auto& s : p.at("slots"))
      slots.push_back({s.at("id").get<std::string>(), s.value("label", ""), s.at("distance_m").get<double>(), {}});
    slots_ = layout::SlotSet(std::move(slots));
    policy_ = policy_from_json(p.at("policy"));
    view_ = parse_layout_payload(p.at("layout"));
    seq_ = msg.seq.value_or(0);
    joined_ = true;
    return true;
  }
  if (!joined_ || !msg.seq) return false;
  if (*msg.seq <= seq_) {
    ++stale_;
    return false;
  }
  if (msg.type == MessageType::LayoutState) apply_layout(msg.payload);
  seq_ = *msg.seq;
  return true;
}

void RoomReplica::apply_layout(const Json& payload) {
  LayoutView next = parse_layout_payload(payload);
  const Json cause = payload.value("cause", Json::object());
  const std::string op = cause.value("op", "");

  std::optional<layout::LayoutState> derived;
  if (op == "rotate") {
    auto result = layout::rotate_layout(view_.layout, slots_, layout::parse_direction(cause.at("direction")));
    if (!result.noop) derived = std::move(result.layout);
  } else if (op == "set" && view_.layout.assignment.contains(cause.at("participant").get<std::string>())) {
    derived = layout::set_assignment(view_.layout, slots_, cause.at("participant"), cause.at("slot"));
  }
  if (derived) {
    if (*derived != next.layout)
      throw Error(ErrorCode::Validation, "replica diverged: local " + op + " does not match server layout");
    ++rederived_;
  }

  layout::check_invariants(next.layout, slots_);
  auto expected = layout::gains_for_layout(next.layout, slots_, policy_);
  for (const auto& q : next.queue) expected[q] = 0.0;
  if (expected != next.gains) throw Error(ErrorCode::Validation, "layout-state gains disagree with its assignment");
  if (next.layout.version < view_.layout.version)
    throw Error(ErrorCode::Validation, "layout version went backwards");

  view_ = std::move(next);
}

}  // namespace proxilink::session
