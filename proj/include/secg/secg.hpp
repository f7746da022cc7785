#pragma once

#include "secg/bitstream.hpp"
#include "secg/codec.hpp"
#include "secg/dictionary.hpp"
#include "secg/entropy.hpp"
#include "secg/error.hpp"
#include "secg/ingest.hpp"
#include "secg/metrics.hpp"
#include "secg/pipeline.hpp"
#include "secg/pursuit.hpp"
#include "secg/report.hpp"
#include "secg/wavelet.hpp"
