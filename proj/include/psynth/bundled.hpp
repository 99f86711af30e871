#pragma once

#include <string_view>

namespace psynth::bundled {

// Contents of the files under data/, compiled in so the tool runs without a data directory.
std::string_view default_schema_json();
std::string_view benchmark_fixture_csv();
std::string_view naive_prior_csv();

} // namespace psynth::bundled
