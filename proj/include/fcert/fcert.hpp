#ifndef FCERT_FCERT_HPP
#define FCERT_FCERT_HPP

#include "fcert/attack.hpp"
#include "fcert/certify.hpp"
#include "fcert/classify.hpp"
#include "fcert/dataset.hpp"
#include "fcert/distance.hpp"
#include "fcert/error.hpp"
#include "fcert/eval.hpp"
#include "fcert/oracle.hpp"
#include "fcert/prng.hpp"
#include "fcert/types.hpp"

#endif
