#pragma once

#include <string>
#include <string_view>

#include "fmrec/feature_model.hpp"

namespace fmrec {

/// Parses the block-structured `.fm` text format:
///
///     model      := "model" IDENT "{" (item | group)* "}" constraints?
///     item       := relkw? "feature" IDENT ("{" (item | group)* "}")?
///     relkw      := "mandatory" | "optional"
///     group      := ("alternative" | "or") "{" item+ "}"
///     constraints:= "constraints" "{" cline* "}"
///     cline      := ("requires" | "excludes") IDENT IDENT
///
/// `#` starts a comment running to end of line. Throws ParseError (with
/// line/column) on syntax errors, duplicate feature names, unknown or
/// self-referencing features in the constraints block, and groups with
/// fewer than two members.
FeatureModel parse_model(std::string_view text);

/// Canonical DSL text for a valid model, indented by two spaces.
std::string serialize_model(const FeatureModel& m);

}  // namespace fmrec
