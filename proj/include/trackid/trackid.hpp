#pragma once

#include "trackid/assignment.hpp"
#include "trackid/baseline.hpp"
#include "trackid/commands.hpp"
#include "trackid/court_geometry.hpp"
#include "trackid/csv.hpp"
#include "trackid/error.hpp"
#include "trackid/identity.hpp"
#include "trackid/image.hpp"
#include "trackid/metrics.hpp"
#include "trackid/oracle.hpp"
#include "trackid/pipeline.hpp"
#include "trackid/pose_metrics.hpp"
#include "trackid/report.hpp"
#include "trackid/synth.hpp"
#include "trackid/trackdata.hpp"
#include "trackid/types.hpp"
