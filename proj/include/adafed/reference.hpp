#pragma once

#include "adafed/dataset.hpp"
#include "adafed/models.hpp"
#include "adafed/vec.hpp"

// Straight-line serial evaluators, written independently of the blocked
// kernels in models.cpp. They accumulate in plain sample order and make no
// attempt at being fast; tests compare the production kernels against them
// and the benchmark tool uses them as the baseline.
namespace adafed::ref {

double loss(const ModelSpec& spec, const ParamVector& params, const Dataset& data);
ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& data);
double accuracy(const ModelSpec& spec, const ParamVector& params, const Dataset& data);

}  // namespace adafed::ref
