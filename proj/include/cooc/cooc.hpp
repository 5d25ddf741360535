#pragma once

#include "cooc/coindex.hpp"
#include "cooc/compress.hpp"
#include "cooc/error.hpp"
#include "cooc/fingerprint.hpp"
#include "cooc/grammar.hpp"
#include "cooc/occindex.hpp"
#include "cooc/oracle.hpp"
#include "cooc/range.hpp"
#include "cooc/serialize.hpp"
#include "cooc/strings.hpp"
#include "cooc/trie.hpp"
