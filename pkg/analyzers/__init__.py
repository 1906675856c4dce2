# Analyzers module
