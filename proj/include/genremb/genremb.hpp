#pragma once

#include "genremb/compose.hpp"
#include "genremb/error.hpp"
#include "genremb/eval.hpp"
#include "genremb/genregraph.hpp"
#include "genremb/linalg.hpp"
#include "genremb/pipeline.hpp"
#include "genremb/retrofit.hpp"
#include "genremb/text.hpp"
#include "genremb/translate.hpp"
#include "genremb/wordvec.hpp"
