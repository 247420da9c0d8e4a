#pragma once

// Umbrella header for the whole library.

#include <grain/attack.hpp>
#include <grain/candidates.hpp>
#include <grain/common.hpp>
#include <grain/delta.hpp>
#include <grain/generate.hpp>
#include <grain/glue.hpp>
#include <grain/gnn.hpp>
#include <grain/graph.hpp>
#include <grain/gsm.hpp>
#include <grain/hungarian.hpp>
#include <grain/io.hpp>
#include <grain/log.hpp>
#include <grain/model.hpp>
#include <grain/reconstruct.hpp>
#include <grain/report.hpp>
#include <grain/schema.hpp>
#include <grain/span.hpp>
