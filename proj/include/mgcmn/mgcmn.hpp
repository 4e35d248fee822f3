#pragma once

#include "mgcmn/config.hpp"
#include "mgcmn/data_io.hpp"
#include "mgcmn/dataset.hpp"
#include "mgcmn/dense_matrix.hpp"
#include "mgcmn/gradcheck.hpp"
#include "mgcmn/graph.hpp"
#include "mgcmn/model.hpp"
#include "mgcmn/model_io.hpp"
#include "mgcmn/motif.hpp"
#include "mgcmn/motif_oracle.hpp"
#include "mgcmn/neural.hpp"
#include "mgcmn/parallel.hpp"
#include "mgcmn/pickle.hpp"
#include "mgcmn/sparse_matrix.hpp"
#include "mgcmn/verify.hpp"
