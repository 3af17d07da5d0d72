#pragma once

#include "ivrauth/synthgen.hpp"

namespace fixtures {

// The 5,000-row regenerated dataset (built-in spec, seed 7).
inline const ivrauth::Dataset& regenerated_dataset() {
    static const ivrauth::Dataset d = ivrauth::generate(ivrauth::builtin_spec());
    return d;
}

}  // namespace fixtures
