#ifndef CADLAB_CADLAB_HPP
#define CADLAB_CADLAB_HPP

#include "cadlab/ecf.hpp"
#include "cadlab/errors.hpp"
#include "cadlab/feature_model.hpp"
#include "cadlab/fisher.hpp"
#include "cadlab/ood_eval.hpp"
#include "cadlab/presets.hpp"
#include "cadlab/random.hpp"

#endif  // CADLAB_CADLAB_HPP
