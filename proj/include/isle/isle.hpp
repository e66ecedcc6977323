#pragma once

#include "isle/bytes.hpp"
#include "isle/codestream.hpp"
#include "isle/entropy.hpp"
#include "isle/error.hpp"
#include "isle/image.hpp"
#include "isle/optimizer.hpp"
#include "isle/report.hpp"
#include "isle/scorer.hpp"
#include "isle/stats.hpp"
#include "isle/stream_service.hpp"
#include "isle/synthetic.hpp"
#include "isle/wavelet.hpp"
#include "isle/wire.hpp"
