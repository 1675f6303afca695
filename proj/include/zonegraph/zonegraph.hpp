#pragma once

#include "zonegraph/common.hpp"
#include "zonegraph/categories.hpp"
#include "zonegraph/scene.hpp"
#include "zonegraph/encoder.hpp"
#include "zonegraph/tensor.hpp"
#include "zonegraph/kmeans.hpp"
#include "zonegraph/hungarian.hpp"
#include "zonegraph/graph_build.hpp"
#include "zonegraph/nn.hpp"
#include "zonegraph/high_level.hpp"
#include "zonegraph/policy.hpp"
#include "zonegraph/config.hpp"
#include "zonegraph/eval.hpp"
#include "zonegraph/trainer.hpp"
