#pragma once

#include <lazyfb/dynamics.hpp>
#include <lazyfb/errors.hpp>
#include <lazyfb/hypergraph.hpp>
#include <lazyfb/io.hpp>
#include <lazyfb/lazy.hpp>
#include <lazyfb/partition.hpp>
#include <lazyfb/plants.hpp>
#include <lazyfb/simulate.hpp>
#include <lazyfb/solver.hpp>
