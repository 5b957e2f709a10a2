#pragma once

#include "qcs/bandit.hpp"
#include "qcs/boundaries.hpp"
#include "qcs/confseq.hpp"
#include "qcs/distributions.hpp"
#include "qcs/errors.hpp"
#include "qcs/extended.hpp"
#include "qcs/ordered_multiset.hpp"
#include "qcs/seqtest.hpp"
#include "qcs/simulate.hpp"
#include "qcs/special.hpp"
