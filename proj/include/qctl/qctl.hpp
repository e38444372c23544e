#pragma once

#include "qctl/error.hpp"
#include "qctl/linalg.hpp"
#include "qctl/operator.hpp"
#include "qctl/random.hpp"

#include "qctl/ito/calculus.hpp"
#include "qctl/ito/derivations.hpp"
#include "qctl/ito/expr.hpp"
#include "qctl/ito/scalar.hpp"
#include "qctl/ito/serialize.hpp"
#include "qctl/ito/table.hpp"

#include "qctl/flow/collision.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/flow/simulate.hpp"

#include "qctl/riccati/care.hpp"
#include "qctl/riccati/cost.hpp"
#include "qctl/riccati/ode.hpp"
#include "qctl/riccati/paper_are.hpp"
#include "qctl/riccati/picard.hpp"

#include "qctl/control/classical_lqr.hpp"
#include "qctl/control/cost.hpp"
#include "qctl/control/gain.hpp"
#include "qctl/control/probe.hpp"

#include "qctl/io/csv.hpp"
#include "qctl/io/matrix_json.hpp"
