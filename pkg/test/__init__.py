# Test package for ellipnls
