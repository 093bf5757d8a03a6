#pragma once

// Umbrella header.

#include "fundeform/common.hpp"
#include "fundeform/mesh.hpp"
#include "fundeform/mesh_io.hpp"
#include "fundeform/meshgen.hpp"
#include "fundeform/fem.hpp"
#include "fundeform/deformation.hpp"
#include "fundeform/shape_difference.hpp"
#include "fundeform/dictionary.hpp"
#include "fundeform/l1.hpp"
#include "fundeform/functional_map.hpp"
#include "fundeform/pipelines.hpp"
