#pragma once

#include "lidarwx/classifier.hpp"
#include "lidarwx/config.hpp"
#include "lidarwx/core.hpp"
#include "lidarwx/error.hpp"
#include "lidarwx/feature_table.hpp"
#include "lidarwx/features.hpp"
#include "lidarwx/frame_io.hpp"
#include "lidarwx/knn.hpp"
#include "lidarwx/metrics.hpp"
#include "lidarwx/model_io.hpp"
#include "lidarwx/pipeline.hpp"
#include "lidarwx/rng.hpp"
#include "lidarwx/scene.hpp"
#include "lidarwx/standardizer.hpp"
#include "lidarwx/stats.hpp"
#include "lidarwx/svm.hpp"
#include "lidarwx/weather_sim.hpp"
