#pragma once

#include <string>

#include "json.hpp"

#include "poisson_stein/chaos.hpp"
#include "poisson_stein/simulator.hpp"
#include "poisson_stein/stein_bounds.hpp"

namespace pstein {

using nlohmann::json;

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// {"cells":[{"weight":w,"label":[...]},...],"truncated":bool}
json to_json(const DiscreteSpace& space);
SpacePtr space_from_json(const json& j);

// {"order":q,"shape":[m,...],"values":[...]} row-major, last index fastest;
// an embedded "space" takes precedence over `space`.
json to_json(const Kernel& f, bool embed_space = false);
Kernel kernel_from_json(const json& j, const SpacePtr& space = nullptr);

// {"constant":c,"orders":{"1":kernel,...}} with an optional "space".
json to_json(const ChaosExpansion& F, bool embed_space = false);
ChaosExpansion chaos_from_json(const json& j, const SpacePtr& space = nullptr);

// {"counts":[...]} on the given space.
PoissonSample sample_from_json(const json& j, const DiscreteSpace& space);

json to_json(const BoundReport& r);
json to_json(const SampleStats& s);

}  // namespace pstein
