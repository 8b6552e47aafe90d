#ifndef DIGITFORGE_DIGITFORGE_HPP
#define DIGITFORGE_DIGITFORGE_HPP

#include "digitforge/errors.hpp"
#include "digitforge/number.hpp"
#include "digitforge/rng.hpp"
#include "digitforge/subdivision.hpp"
#include "digitforge/density.hpp"
#include "digitforge/coupling.hpp"
#include "digitforge/markov.hpp"
#include "digitforge/readonce.hpp"
#include "digitforge/verify.hpp"
#include "digitforge/polyatree.hpp"
#include "digitforge/io.hpp"

#endif  // DIGITFORGE_DIGITFORGE_HPP
