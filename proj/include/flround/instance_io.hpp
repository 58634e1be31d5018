#pragma once

#include <string>
#include <string_view>

#include "flround/core_model.hpp"

namespace flround {

enum class InstanceKind { kUfl, kTwoStage, kRobust };
enum class FileFormat { kOrlib, kText };

const char* kind_name(InstanceKind kind);

// Any of the three instance kinds. For kTwoStage the base lives in
// two_stage.base, for kRobust in robust.base, otherwise in ufl.
struct InstanceFile {
  InstanceKind kind = InstanceKind::kUfl;
  FileFormat format = FileFormat::kText;
  UflInstance ufl;
  TwoStageInstance two_stage;
  RobustInstance robust;

  const UflInstance& base() const;
};

// OR-Library uncapacitated format: "m n", m lines "capacity cost", then per
// client a demand followed by m allocation costs. Capacities and demands are
// read and dropped. Throws ParseError.
UflInstance parse_orlib(std::string_view text);

// Line-oriented text format with '#' comments:
//   FORMAT ufl | two-stage | robust
//   FACILITIES m        then m lines "id cost"
//   CLIENTS n           then n ids
//   COSTS               then m rows of n distances
//   SCENARIOS s         then s lines "p count id... | f_1 .. f_m" (two-stage,
//                       the bar is optional)
//   ROBUST_K k                                                  (robust)
InstanceFile parse_text_instance(std::string_view text);

// Picks the text format when the first token is FORMAT, OR-Library otherwise.
InstanceFile parse_instance(std::string_view text);

InstanceFile read_instance_file(const std::string& path);

// Shortest round-trip number formatting. OR-Library output is only
// available for plain UFL instances; capacities and demands are written as 0
// and 1.
std::string serialize_instance(const InstanceFile& file, FileFormat format);

void write_instance_file(const std::string& path, const InstanceFile& file, FileFormat format);

}  // namespace flround
