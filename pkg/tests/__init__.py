# Testing package for VSK Kriging
