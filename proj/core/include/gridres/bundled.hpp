#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gridres {

/// Names of the case documents compiled into the library.
std::vector<std::string> bundled_case_names();
bool is_bundled_case(std::string_view name);

/// Returns the raw document text; throws std::invalid_argument for
/// unknown names.
std::string bundled_case_text(std::string_view name);

}  // namespace gridres
