#pragma once

#include <string>

#include "json.hpp"
#include "lyap/domain.hpp"
#include "lyap/family.hpp"
#include "lyap/field.hpp"

namespace lyap::cli {

using Json = nlohmann::ordered_json;

// Named families, fields, densities and countable specs selectable from the
// JSON config. Every builtin is deterministic given its parameters.

FunctionFamily make_builtin_family(const Json& spec, const SampledDomain& dom);

AuxiliaryField make_builtin_field(const Json& spec, const FunctionFamily& family,
                                  const SampledDomain& dom);

RelaxedDensity make_density(const Json& spec, int family_size,
                            const SampledDomain& dom);

struct CountableBuiltin {
    CountableFamilySpec spec;
    // canonical density on the truncated index set (tail mass folded onto
    // the last kept index)
    RelaxedDensity matched_density(int truncation_index,
                                   const SampledDomain& dom) const;
    std::string name;
};

CountableBuiltin make_countable_builtin(const Json& spec);

}  // namespace lyap::cli
