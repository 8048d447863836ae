#pragma once

#include <string_view>

namespace graphtag {

enum class Mode { pos_tagger, supertagger, parser, joint_stag, joint_pos_stag };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

// Parser and joint modes prepend a ROOT token at index 0.
constexpr bool uses_root(Mode m) {
  return m == Mode::parser || m == Mode::joint_stag || m == Mode::joint_pos_stag;
}
constexpr bool predicts_arcs(Mode m) { return uses_root(m); }
constexpr bool predicts_pos(Mode m) { return m == Mode::pos_tagger || m == Mode::joint_pos_stag; }
constexpr bool predicts_stag(Mode m) {
  return m == Mode::supertagger || m == Mode::joint_stag || m == Mode::joint_pos_stag;
}

}  // namespace graphtag
