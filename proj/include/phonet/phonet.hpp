#ifndef PHONET_PHONET_HPP
#define PHONET_PHONET_HPP

#include "phonet/corpus.hpp"
#include "phonet/error.hpp"
#include "phonet/matrix.hpp"
#include "phonet/netbuild.hpp"
#include "phonet/nullmodel.hpp"
#include "phonet/pipeline.hpp"
#include "phonet/random.hpp"
#include "phonet/report.hpp"
#include "phonet/spectra.hpp"
#include "phonet/typology.hpp"

#endif // PHONET_PHONET_HPP
