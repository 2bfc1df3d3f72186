#pragma once

#include "fcm/activation.hpp"
#include "fcm/baselines.hpp"
#include "fcm/config.hpp"
#include "fcm/dataset.hpp"
#include "fcm/errors.hpp"
#include "fcm/gradcheck.hpp"
#include "fcm/inference.hpp"
#include "fcm/loss.hpp"
#include "fcm/metrics.hpp"
#include "fcm/model.hpp"
#include "fcm/optimizer.hpp"
#include "fcm/persistence.hpp"
#include "fcm/pipeline.hpp"
#include "fcm/random.hpp"
#include "fcm/scaling.hpp"
#include "fcm/trainer.hpp"
