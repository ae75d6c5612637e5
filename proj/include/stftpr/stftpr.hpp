#pragma once

#include "stftpr/errors.hpp"
#include "stftpr/generators.hpp"
#include "stftpr/model.hpp"
#include "stftpr/oracle.hpp"
#include "stftpr/phase.hpp"
#include "stftpr/robustness.hpp"
#include "stftpr/spectral.hpp"
#include "stftpr/stft.hpp"
#include "stftpr/support_graph.hpp"
#include "stftpr/window.hpp"
