# Datasets, binning, tree growing, boosting and evaluation
