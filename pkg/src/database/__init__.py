# Database Module

