package com.shop.catalog;

import java.util.HashMap;
import java.util.Map;

public class ProductRepository {
    private final Map<String, Product> bySku = new HashMap<>();

    public Product find(String sku) {
        return bySku.get(sku);
    }

    public void store(String sku, Product product) {
        bySku.put(sku, product);
    }
}
