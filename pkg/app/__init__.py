# Stable map classification package
