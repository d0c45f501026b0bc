# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Iterative Model Weight Averaging toolkit
##
## License   : GPL Version 2
## --------------------------------------------------------------------

package = "imwa"
version = "0.4.0-dev"
license = "GNU GPL v2+"
short_description = "Iterative model weight averaging experiments on long-tailed data"
long_description = """
imwa trains several models from a shared initialization, averages
their weights at the end of every episode and restarts from the
average. It ships a small numpy MLP engine, long-tailed dataset
construction, EMA collaboration, and an ablation harness that
compares baselines, vanilla weight averaging and the iterative
variant over paired seeds.
"""

# vim:et:ts=4:sts=4:ai
